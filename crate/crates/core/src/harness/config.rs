//! Run configuration: TOML with `[lattice]`, `[model]`, `[weights]`,
//! `[expansion]` and `[output]` tables. Absent keys take the defaults below.

use serde::{Deserialize, Serialize};

use crate::cluster::ExpansionCaps;
use crate::error::{Error, Result};
use crate::gross_neveu::{LatticeSpec, ModelParams};
use crate::lattice::Metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Truncated,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "truncated" => Ok(Mode::Truncated),
            _ => Err(Error::Config(format!("mode must be exact or truncated, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OraclePolicy {
    /// Run when the universe is small enough.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub d: usize,
    /// Side length of every axis.
    pub l: usize,
    pub flavors: usize,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig { d: 2, l: 2, flavors: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub g: f64,
    pub m_f: f64,
    /// Drop the quartic interaction, leaving the free theory with sources.
    pub free: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { g: 0.05, m_f: 1.0, free: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsConfig {
    pub h1: f64,
    pub h2: f64,
    pub kappa: f64,
    pub metric: Metric,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        WeightsConfig { h1: 4.0, h2: 1.0, kappa: 0.5, metric: Metric::Euclidean }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpansionConfig {
    pub mode: Mode,
    /// Cluster order cap, used in truncated mode.
    pub n_max: usize,
    /// Kernel factors per connected cover, used in truncated mode when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_diameter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_polymer_sites: Option<usize>,
    /// Highest source degree kept in `log Z`; 2 suffices for two-point functions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_degree: Option<u32>,
    pub oracle: OraclePolicy,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            mode: Mode::Exact,
            n_max: 3,
            k_max: None,
            max_diameter: None,
            max_polymer_sites: None,
            eta_degree: None,
            oracle: OraclePolicy::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub path: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { path: "report.json".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub model: ModelConfig,
    pub weights: WeightsConfig,
    pub expansion: ExpansionConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.lattice.d < 2 {
            return bad(format!("lattice.d = {} violates d >= 2", self.lattice.d));
        }
        if self.lattice.l == 0 || self.lattice.flavors == 0 {
            return bad("lattice.l and lattice.flavors must be at least 1".into());
        }
        self.params().validate().map_err(|e| Error::Config(e.to_string()))?;
        let e = &self.expansion;
        if e.n_max == 0 || e.k_max == Some(0) || e.max_polymer_sites == Some(0) || e.eta_degree == Some(0) {
            return bad("expansion caps must be at least 1".into());
        }
        if e.max_diameter.is_some_and(|d| !(d >= 0.0)) {
            return bad("expansion.max_diameter must be non-negative".into());
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<LatticeSpec> {
        LatticeSpec::cubic(self.lattice.d, self.lattice.l, self.lattice.flavors).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            g: self.model.g,
            m_f: self.model.m_f,
            kappa: self.weights.kappa,
            h1: self.weights.h1,
            h2: self.weights.h2,
            metric: self.weights.metric,
        }
    }

    pub fn caps(&self) -> ExpansionCaps {
        let e = &self.expansion;
        let truncated = e.mode == Mode::Truncated;
        ExpansionCaps {
            n_max: truncated.then_some(e.n_max),
            k_max: if truncated { e.k_max } else { None },
            max_diameter: e.max_diameter,
            max_polymer_sites: e.max_polymer_sites,
            eta_degree: e.eta_degree,
            metric: self.weights.metric,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

pub fn parse_config(source: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(source).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!((cfg.weights.h1, cfg.weights.h2), (4.0, 1.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_config("[lattice]\nd = 1\n"), Err(Error::Config(m)) if m.contains("d >= 2")));
        assert!(parse_config("[lattice]\nsize = 3\n").is_err());
        assert!(parse_config("[weights]\nkappa = 1.5\n").is_err());
        assert!(parse_config("[expansion]\nn_max = 0\n").is_err());
        assert!(parse_config("[model]\ng = -0.1\n").is_err());
    }

    #[test]
    fn round_trip() {
        let src = "[lattice]\nl = 3\n[expansion]\nmode = \"truncated\"\nmax_polymer_sites = 4\neta_degree = 2\n[weights]\nmetric = \"l1\"\n";
        let cfg = parse_config(src).unwrap();
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(cfg.caps().n_max, Some(3));
    }
}
