//! Acceptance criteria, one test each. Every test prints a single PASS/FAIL line.

use fermionic_cluster::harness::verify::{find, run_criterion};

fn criterion(id: &str) {
    let result = run_criterion(find(id));
    println!("{}", result.line());
    assert!(result.passed, "criterion {} failed: {}", result.id, result.detail);
}

#[test]
fn c01_oracle_equivalence() {
    criterion("1");
}

#[test]
fn c02_theorem1_bound() {
    criterion("2");
}

#[test]
fn c03_norm_examples() {
    criterion("3");
}

#[test]
fn c04_lemma2_partial_sums() {
    criterion("4");
}

#[test]
fn c05_lemma1_tree_sums() {
    criterion("5");
}

#[test]
fn c06_tree_counts() {
    criterion("6");
}

#[test]
fn c07_source_parity() {
    criterion("7");
}

#[test]
fn c08_free_theory_reduction() {
    criterion("8");
}

#[test]
fn c09_covariance_decay() {
    criterion("9");
}

#[test]
fn c10_decay_regime_across_sizes() {
    criterion("10");
}

#[test]
fn c11_determinism() {
    criterion("11");
}

#[test]
fn golden_file_matches() {
    criterion("golden");
}
