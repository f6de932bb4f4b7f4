//! Rewrites `golden/gn_2x2.json` from the direct Berezin route.

fn main() {
    let file = fermionic_cluster::harness::golden::generate().expect("golden values");
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/golden/gn_2x2.json");
    std::fs::write(path, serde_json::to_string_pretty(&file).unwrap() + "\n").unwrap();
    println!("wrote {path}");
}
