//! Golden values for the default 2×2 Gross–Neveu run, produced by the direct
//! Berezin route and guarded by a SHA-256 over the value block.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::berezin::log_direct_capped;
use crate::error::{Error, Result};
use crate::gross_neveu::truncated_two_point;
use crate::harness::config::RunConfig;
use crate::harness::experiment::build_model;
use crate::norms::logseries_norm;

pub const EMBEDDED: &str = include_str!("../../golden/gn_2x2.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub crate_version: String,
    pub config_sha256: String,
    pub config: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPoint {
    pub y: usize,
    pub alpha: usize,
    pub beta: usize,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenValues {
    pub log_det: f64,
    pub constant: Complex64,
    pub terms: usize,
    pub h_norm: f64,
    pub two_point: Vec<TwoPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFile {
    pub provenance: Provenance,
    pub values: GoldenValues,
    pub values_sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn values_hash(v: &GoldenValues) -> String {
    sha256_hex(serde_json::to_string(v).expect("values serialize").as_bytes())
}

pub fn golden_config() -> RunConfig {
    RunConfig::default()
}

/// Values from the direct route for [`golden_config`].
pub fn compute_values(cfg: &RunConfig) -> Result<GoldenValues> {
    let model = build_model(cfg)?;
    let log = log_direct_capped(&model.v1.exponent().to_element(), cfg.expansion.eta_degree)?;
    let u = &model.universe;
    let mut two_point = Vec::new();
    for y in 0..u.lattice().volume() {
        for alpha in 0..u.spinor_dim() {
            for beta in 0..u.spinor_dim() {
                let value = truncated_two_point(u, &log, cfg.model.g, 0, y, alpha, beta, 0, 0)?;
                two_point.push(TwoPoint { y, alpha, beta, value });
            }
        }
    }
    Ok(GoldenValues {
        log_det: model.covariance.log_det,
        constant: log.constant(),
        terms: log.element().len(),
        h_norm: logseries_norm(u, &log, cfg.weights.h2, cfg.weights.kappa, cfg.weights.metric)?,
        two_point,
    })
}

pub fn generate() -> Result<GoldenFile> {
    let cfg = golden_config();
    let toml = cfg.to_toml();
    let values = compute_values(&cfg)?;
    Ok(GoldenFile {
        provenance: Provenance {
            generator: "berezin::log_direct_capped".into(),
            crate_version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: sha256_hex(toml.as_bytes()),
            config: toml,
        },
        values_sha256: values_hash(&values),
        values,
    })
}

/// Checks integrity of `text` and compares its values with a fresh computation.
pub fn check(text: &str) -> Result<String> {
    let file: GoldenFile = serde_json::from_str(text).map_err(|e| Error::Config(format!("golden file unreadable: {e}")))?;
    if values_hash(&file.values) != file.values_sha256 {
        return Err(Error::Config("golden values do not match their SHA-256".into()));
    }
    if sha256_hex(file.provenance.config.as_bytes()) != file.provenance.config_sha256 {
        return Err(Error::Config("golden config does not match its SHA-256".into()));
    }
    let cfg = crate::harness::config::parse_config(&file.provenance.config)?;
    let fresh = compute_values(&cfg)?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-12);
    let closec = |a: Complex64, b: Complex64| (a - b).norm() <= 1e-10 * a.norm().max(b.norm()).max(1e-12);
    let g = &file.values;
    let mut ok = close(g.log_det, fresh.log_det)
        && closec(g.constant, fresh.constant)
        && g.terms == fresh.terms
        && close(g.h_norm, fresh.h_norm)
        && g.two_point.len() == fresh.two_point.len();
    ok &= g.two_point.iter().zip(&fresh.two_point).all(|(a, b)| (a.y, a.alpha, a.beta) == (b.y, b.alpha, b.beta) && closec(a.value, b.value));
    if !ok {
        return Err(Error::Config("recomputed values differ from the golden file".into()));
    }
    Ok(format!("{} two-point values, {} log terms match", g.two_point.len(), g.terms))
}
