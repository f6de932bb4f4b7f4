//! `fcluster`: command-line driver for the Gross–Neveu cluster expansion.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fermionic_cluster::gross_neveu::{correlation_table, model_norms};
use fermionic_cluster::harness::config::{parse_config, Mode, RunConfig};
use fermionic_cluster::harness::experiment::{build_model, covariance_report, expand, run_experiment};
use fermionic_cluster::harness::report::{write_correlations_csv, write_new};
use fermionic_cluster::harness::verify::{verify_suite, Level};
use fermionic_cluster::trees::{enumerate_trees, tree_factorial_weight};
use fermionic_cluster::Error;

#[derive(Parser)]
#[command(name = "fcluster", version, about = "Cluster expansion for lattice Gross-Neveu models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file. Existing files are never overwritten; a numbered sibling is used instead.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `expansion.mode`.
    #[arg(long, value_parser = ["exact", "truncated"])]
    mode: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Free covariance: log det and decay profile (JSON).
    Covariance(Common),
    /// Full run: expansion, norms, correlations, optional oracle comparison (JSON).
    Expand(Common),
    /// Weighted norms of the interaction (JSON).
    Norms(Common),
    /// Truncated two-point function from site 0 (CSV).
    Correlate(Common),
    /// Tree counts and factorial weights up to `--max-n`.
    Trees {
        #[arg(long, default_value_t = 7)]
        max_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the verification suite.
    Verify {
        #[arg(long, value_parser = ["quick", "full"], default_value = "quick")]
        level: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Error(Error),
    Verification(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(m) = &common.mode {
        cfg.expansion.mode = m.parse::<Mode>()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn emit(out: Option<&Path>, default: &str, bytes: &[u8]) -> Result<(), Error> {
    let path = write_new(out.unwrap_or(Path::new(default)), bytes)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Covariance(c) => {
            let cfg = load(&c)?;
            let cov = fermionic_cluster::gross_neveu::covariance(&cfg.spec()?, cfg.model.m_f)?;
            emit(c.out.as_deref(), "covariance.json", &json(&covariance_report(&cfg, &cov)))?;
        }
        Command::Expand(c) => {
            let cfg = load(&c)?;
            let report = run_experiment(&cfg)?;
            let default = cfg.output.path.clone();
            emit(c.out.as_deref(), &default, report.to_json().as_bytes())?;
            if let Some(o) = &report.oracle {
                if !o.agree {
                    eprintln!("oracle disagreement: max relative difference {:.3e}", o.max_rel_diff);
                    return Err(Failure::Verification(1));
                }
            }
        }
        Command::Norms(c) => {
            let cfg = load(&c)?;
            let model = build_model(&cfg)?;
            let norms = model_norms(&model.universe, &model.v1, &cfg.params())?;
            emit(c.out.as_deref(), "norms.json", &json(&norms))?;
        }
        Command::Correlate(c) => {
            let cfg = load(&c)?;
            let model = build_model(&cfg)?;
            let e = expand(&cfg, &model)?;
            let rows = correlation_table(&model.universe, &e.log, cfg.model.g, cfg.weights.metric)?;
            let mut buf = Vec::new();
            write_correlations_csv(&rows, &mut buf)?;
            match c.out {
                Some(path) => emit(Some(&path), "", &buf)?,
                None => print!("{}", String::from_utf8_lossy(&buf)),
            }
        }
        Command::Trees { max_n, out } => {
            let mut rows = Vec::new();
            println!("n,trees,factorial_weight");
            for n in 2..=max_n {
                let count = enumerate_trees(n)?.len();
                let weight = tree_factorial_weight(n);
                println!("{n},{count},{weight}");
                rows.push(serde_json::json!({ "n": n, "trees": count, "factorial_weight": weight }));
            }
            if let Some(path) = out {
                emit(Some(&path), "", &json(&rows))?;
            }
        }
        Command::Verify { level, out } => {
            let results = verify_suite(level.parse::<Level>()?);
            for r in &results {
                println!("{}", r.line());
            }
            if let Some(path) = out {
                emit(Some(&path), "", &json(&results))?;
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(Failure::Verification(failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(n)) => {
            eprintln!("{n} check(s) failed");
            ExitCode::from(4)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::Capacity(_) => 3,
                _ => 1,
            })
        }
    }
}
