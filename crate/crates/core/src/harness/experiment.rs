//! The Gross–Neveu pipeline: covariance, `V₁`, expansion of `log Z`, oracle
//! comparison, norms, correlations and fits.

use std::time::Instant;

use crate::berezin::log_direct_capped;
use crate::cluster::{assemble_b, Expansion};
use crate::error::Result;
use crate::grassmann::{CoefficientSystem, GrassmannElement, Universe};
use crate::gross_neveu::{build_v1, correlation_table, covariance, decay_fit, envelope, model_norms, Covariance, V1Parts};
use crate::harness::config::{OraclePolicy, RunConfig};
use crate::harness::report::{CovarianceReport, ExpansionReport, OracleReport, RunReport, SCHEMA_VERSION};
use crate::norms::theorem1_check;

/// Psi generators up to which the automatic policy runs the oracle.
pub const AUTO_ORACLE_PSI: usize = 16;

pub struct Model {
    pub universe: Universe,
    pub covariance: Covariance,
    pub v1: V1Parts,
}

pub fn build_model(cfg: &RunConfig) -> Result<Model> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let universe = spec.universe()?;
    let covariance = covariance(&spec, cfg.model.m_f)?;
    let mut v1 = build_v1(&universe, &covariance, cfg.model.g)?;
    if cfg.model.free {
        v1.quartic = CoefficientSystem::new();
    }
    Ok(Model { universe, covariance, v1 })
}

pub fn covariance_report(cfg: &RunConfig, cov: &Covariance) -> CovarianceReport {
    let decay = cov.decay_table(cfg.weights.metric);
    let fit = decay_fit(&decay).ok();
    CovarianceReport { log_det: cov.log_det, decay, fit }
}

pub fn expand(cfg: &RunConfig, model: &Model) -> Result<Expansion> {
    assemble_b(&model.universe, &model.v1.exponent(), &cfg.caps())
}

fn oracle_wanted(cfg: &RunConfig, model: &Model) -> bool {
    match cfg.expansion.oracle {
        OraclePolicy::Always => true,
        OraclePolicy::Never => false,
        OraclePolicy::Auto => model.universe.family_size() <= AUTO_ORACLE_PSI || model.v1.quartic.is_empty(),
    }
}

/// Largest `|a − b| / max(|a|, |b|)` over coefficients above `floor`.
pub fn max_rel_diff(a: &GrassmannElement, b: &GrassmannElement, floor: f64) -> f64 {
    let rel = |x: num_complex::Complex64, y: num_complex::Complex64| {
        let scale = x.norm().max(y.norm());
        if scale <= floor {
            0.0
        } else {
            (x - y).norm() / scale
        }
    };
    let mut worst = rel(a.scalar_part(), b.scalar_part());
    for (m, c) in a.terms() {
        worst = worst.max(rel(c, b.coefficient(m)));
    }
    for (m, c) in b.terms() {
        worst = worst.max(rel(c, a.coefficient(m)));
    }
    worst
}

pub fn oracle_report(cfg: &RunConfig, model: &Model, expansion: &Expansion) -> Result<OracleReport> {
    let direct = log_direct_capped(&model.v1.exponent().to_element(), cfg.expansion.eta_degree)?;
    let (a, b) = (expansion.log.element(), direct.element());
    Ok(OracleReport { max_abs_diff: a.max_abs_diff(b), max_rel_diff: max_rel_diff(a, b, 1e-12), agree: a.approx_eq(b, 1e-8, 1e-12) })
}

pub fn run_experiment(cfg: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let model = build_model(cfg)?;
    let params = cfg.params();
    let covariance = covariance_report(cfg, &model.covariance);
    let norms = model_norms(&model.universe, &model.v1, &params)?;
    let expansion = expand(cfg, &model)?;
    let oracle = if oracle_wanted(cfg, &model) { Some(oracle_report(cfg, &model, &expansion)?) } else { None };
    let theorem1 = theorem1_check(&model.universe, &model.v1.exponent(), &expansion.log, params.h2, params.kappa, params.metric)?;
    let (correlations, correlation_fit) = if cfg.model.g > 0.0 {
        let rows = correlation_table(&model.universe, &expansion.log, cfg.model.g, params.metric)?;
        let fit = decay_fit(&envelope(rows.iter().map(|r| (r.distance, r.value.norm())))).ok();
        (rows, fit)
    } else {
        (Vec::new(), None)
    };
    let summary = ExpansionReport {
        exact: expansion.exact,
        notes: expansion.notes.clone(),
        polymer_count: expansion.polymer_count,
        constant: expansion.log.constant(),
        terms: expansion.log.element().len(),
        max_odd_coefficient: expansion.log.max_odd_coefficient(),
    };
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        covariance,
        norms,
        expansion: summary,
        theorem1,
        correlations,
        correlation_fit,
        oracle,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}
