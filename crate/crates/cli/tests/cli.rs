use std::fs;
use std::process::Command;

fn fcluster() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fcluster"))
}

#[test]
fn trees_prints_cayley_counts() {
    let out = fcluster().args(["trees", "--max-n", "6"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "6,1296,32760"), "{text}");
}

#[test]
fn config_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "[lattice]\nd = 1\n").unwrap();
    let status = fcluster().args(["norms", "--config"]).arg(&path).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = fcluster().args(["norms", "--config"]).arg(dir.path().join("missing.toml")).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn capacity_error_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.toml");
    fs::write(&path, "[lattice]\nl = 5\n").unwrap();
    let status = fcluster().args(["expand", "--config"]).arg(&path).current_dir(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn correlate_writes_csv_without_overwriting() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("corr.csv");
    for _ in 0..2 {
        let status = fcluster().args(["correlate", "--mode", "truncated", "--out"]).arg(&out).status().unwrap();
        assert!(status.success());
    }
    let first = fs::read_to_string(&out).unwrap();
    let second = fs::read_to_string(dir.path().join("corr-1.csv")).unwrap();
    assert_eq!(first, second);
    let mut lines = first.lines();
    assert_eq!(lines.next(), Some("distance,alpha,beta,flavor,re,im,abs"));
    assert_eq!(lines.count(), 16);
}

#[test]
fn covariance_report_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cov.json");
    assert!(fcluster().args(["covariance", "--out"]).arg(&out).status().unwrap().success());
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(value["log_det"].is_number());
    assert!(value["fit"]["kappa"].as_f64().unwrap() > 0.0);
}

#[test]
fn quick_verification_passes() {
    let out = fcluster().args(["verify", "--level", "quick"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().all(|l| l.starts_with("[PASS]")), "{text}");
}
