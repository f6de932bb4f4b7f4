//! Run reports (JSON) and correlation tables (CSV).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gross_neveu::{CorrelationRow, DecayFit, ModelNorms};
use crate::harness::config::RunConfig;
use crate::norms::Theorem1Check;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    /// `log |det S|` per flavor.
    pub log_det: f64,
    /// `(distance, max |S_{αβ}(0, y)|)`.
    pub decay: Vec<(f64, f64)>,
    pub fit: Option<DecayFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub exact: bool,
    pub notes: Vec<String>,
    pub polymer_count: usize,
    /// `log Z[0]` without the `det S` factor.
    pub constant: Complex64,
    pub terms: usize,
    /// Largest coefficient on an odd number of sources.
    pub max_odd_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub max_abs_diff: f64,
    pub max_rel_diff: f64,
    /// Coefficientwise agreement at relative 1e-8, absolute floor 1e-12.
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub covariance: CovarianceReport,
    pub norms: ModelNorms,
    pub expansion: ExpansionReport,
    pub theorem1: Theorem1Check,
    pub correlations: Vec<CorrelationRow>,
    pub correlation_fit: Option<DecayFit>,
    pub oracle: Option<OracleReport>,
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: RunReport = serde_json::from_str(s).map_err(|e| Error::Config(format!("unreadable report: {e}")))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!("report schema {} is not {SCHEMA_VERSION}", r.schema_version)));
        }
        Ok(r)
    }

    /// JSON with the wall time zeroed, for reproducibility comparisons.
    pub fn stable_json(&self) -> String {
        let mut r = self.clone();
        r.wall_time_seconds = 0.0;
        r.to_json()
    }
}

pub fn write_correlations_csv<W: Write>(rows: &[CorrelationRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["distance", "alpha", "beta", "flavor", "re", "im", "abs"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.distance.to_string(),
            r.alpha.to_string(),
            r.beta.to_string(),
            r.flavor.to_string(),
            // adding zero turns -0 into 0
            (r.value.re + 0.0).to_string(),
            (r.value.im + 0.0).to_string(),
            r.value.norm().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes `contents` to `path`, or to `stem-N.ext` for the first free `N` when
/// `path` exists. Existing files are never touched.
pub fn write_new(path: &Path, contents: &[u8]) -> Result<PathBuf> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report").to_string();
    let ext = path.extension().and_then(|s| s.to_str()).map(|e| format!(".{e}")).unwrap_or_default();
    let mut candidate = path.to_path_buf();
    let mut n = 1;
    loop {
        match fs::OpenOptions::new().write(true).create_new(true).open(&candidate) {
            Ok(mut f) => {
                f.write_all(contents)?;
                return Ok(candidate);
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                candidate = path.with_file_name(format!("{stem}-{n}{ext}"));
                n += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
}
