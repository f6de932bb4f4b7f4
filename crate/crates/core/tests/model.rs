use fermionic_cluster::gross_neveu::{covariance, truncated_two_point, LatticeSpec};
use fermionic_cluster::harness::config::{parse_config, RunConfig};
use fermionic_cluster::harness::experiment::{build_model, expand};
use fermionic_cluster::harness::golden;

#[test]
fn flavors_are_interchangeable() {
    let mut cfg = RunConfig::default();
    cfg.lattice.flavors = 2;
    cfg.expansion.eta_degree = Some(2);
    cfg.expansion.max_polymer_sites = Some(2);
    let model = build_model(&cfg).unwrap();
    let e = expand(&cfg, &model).unwrap();
    let u = &model.universe;
    for y in 0..4 {
        for (alpha, beta) in [(0, 0), (1, 1), (0, 1)] {
            let first = truncated_two_point(u, &e.log, cfg.model.g, 0, y, alpha, beta, 0, 0).unwrap();
            let second = truncated_two_point(u, &e.log, cfg.model.g, 0, y, alpha, beta, 1, 1).unwrap();
            assert!((first - second).norm() <= 1e-12 * first.norm().max(1e-12), "y={y} {first} vs {second}");
            let mixed = truncated_two_point(u, &e.log, cfg.model.g, 0, y, alpha, beta, 0, 1).unwrap();
            assert!(mixed.norm() < 1e-14);
        }
    }
}

#[test]
fn heavier_mass_lowers_log_det() {
    // a heavier mass makes the propagator smaller and log|det S| more negative
    let spec = LatticeSpec::cubic(2, 4, 1).unwrap();
    let light = covariance(&spec, 0.5).unwrap();
    let heavy = covariance(&spec, 2.0).unwrap();
    assert!(heavy.log_det < light.log_det);
}

#[test]
fn golden_file_rejects_tampering() {
    let text = golden::EMBEDDED;
    let mut value: serde_json::Value = serde_json::from_str(text).unwrap();
    let original = value["values"]["log_det"].as_f64().unwrap();
    value["values"]["log_det"] = serde_json::json!(original + 1e-6);
    assert!(golden::check(&value.to_string()).is_err());

    let mut value: serde_json::Value = serde_json::from_str(text).unwrap();
    let config = value["provenance"]["config"].as_str().unwrap().replace("g = 0.05", "g = 0.06");
    value["provenance"]["config"] = serde_json::json!(config);
    assert!(golden::check(&value.to_string()).is_err());
}

#[test]
fn config_file_round_trips() {
    let mut cfg = RunConfig::default();
    cfg.lattice.l = 3;
    cfg.expansion.max_polymer_sites = Some(5);
    let again = parse_config(&cfg.to_toml()).unwrap();
    assert_eq!(cfg, again);
}
