//! The verification suite: one check per acceptance criterion plus the golden file.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::berezin::LogSeries;
use crate::cluster::assemble_b;
use crate::error::Result;
use crate::grassmann::{CoefficientSystem, Universe};
use crate::gross_neveu::{covariance, decay_fit, envelope, correlation_table, truncated_two_point, LatticeSpec};
use crate::harness::config::{Mode, RunConfig};
use crate::harness::experiment::{build_model, expand, oracle_report, run_experiment};
use crate::harness::golden;
use crate::lattice::{Lattice, Metric};
use crate::norms::{coeff_norm, kernel_norm, lemma1_check, local_quartic_kernel, local_source_kernel, theorem1_check, Verdict, WeightSystem};
use crate::trees::{count_trees_with_degrees, enumerate_trees, lemma2_bound, lemma2_partial_sum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl std::str::FromStr for Level {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            _ => Err(crate::error::Error::Config(format!("level must be quick or full, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!("[{}] {:>6} {}: {} ({:.1}s)", if self.passed { "PASS" } else { "FAIL" }, self.id, self.name, self.detail, self.seconds)
    }
}

type Check = fn() -> Result<(bool, String)>;

pub struct Criterion {
    pub id: &'static str,
    pub name: &'static str,
    pub quick: bool,
    pub check: Check,
}

pub const CRITERIA: &[Criterion] = &[
    Criterion { id: "1", name: "oracle equivalence", quick: false, check: oracle_equivalence },
    Criterion { id: "2", name: "theorem 1 bound", quick: false, check: theorem1_bound },
    Criterion { id: "3", name: "norm examples", quick: true, check: norm_examples },
    Criterion { id: "4", name: "lemma 2 partial sums", quick: true, check: lemma2_sums },
    Criterion { id: "5", name: "lemma 1 tree sums", quick: true, check: lemma1_random },
    Criterion { id: "6", name: "tree counts", quick: true, check: tree_counts },
    Criterion { id: "7", name: "source parity", quick: true, check: parity },
    Criterion { id: "8", name: "free-theory reduction", quick: false, check: free_theory },
    Criterion { id: "9", name: "covariance decay", quick: true, check: covariance_decay },
    Criterion { id: "10", name: "decay regime across sizes", quick: false, check: decay_regime },
    Criterion { id: "11", name: "determinism", quick: false, check: determinism },
    Criterion { id: "golden", name: "golden file", quick: true, check: golden_embedded },
];

pub fn run_criterion(c: &Criterion) -> CriterionResult {
    let start = Instant::now();
    let (passed, detail) = match (c.check)() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult { id: c.id.into(), name: c.name.into(), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn find(id: &str) -> &'static Criterion {
    CRITERIA.iter().find(|c| c.id == id).expect("known criterion")
}

pub fn verify_suite(level: Level) -> Vec<CriterionResult> {
    CRITERIA.iter().filter(|c| level == Level::Full || c.quick).map(run_criterion).collect()
}

pub const ORACLE_COUPLINGS: [f64; 3] = [0.02, 0.05, 0.1];

fn gn_config(l: usize, g: f64) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.lattice.l = l;
    cfg.model.g = g;
    cfg
}

pub fn oracle_equivalence() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for g in ORACLE_COUPLINGS {
        let start = Instant::now();
        let cfg = gn_config(2, g);
        let model = build_model(&cfg)?;
        let e = expand(&cfg, &model)?;
        let o = oracle_report(&cfg, &model, &e)?;
        let secs = start.elapsed().as_secs_f64();
        ok &= o.agree && e.exact && secs < 300.0;
        parts.push(format!("g={g}: max abs {:.1e}, max rel {:.1e}, {} terms, {secs:.1}s", o.max_abs_diff, o.max_rel_diff, e.log.element().len()));
    }
    Ok((ok, parts.join("; ")))
}

/// Coupling small enough for the `1/16` gate on the 2×2 lattice.
pub const GATED_COUPLING: f64 = 0.002;

pub fn theorem1_bound() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut gated = 0;
    for g in ORACLE_COUPLINGS.iter().copied().chain([GATED_COUPLING]) {
        let cfg = gn_config(2, g);
        let model = build_model(&cfg)?;
        let e = expand(&cfg, &model)?;
        let p = cfg.params();
        let t = theorem1_check(&model.universe, &model.v1.exponent(), &e.log, p.h2, p.kappa, p.metric)?;
        if t.verdict != Verdict::NotApplicable {
            gated += 1;
        }
        ok &= t.verdict != Verdict::Violated;
        parts.push(format!("g={g}: |V1|={:.4} |H-H0|={:.3e} {:?}", t.f_norm, t.h_norm, t.verdict));
    }
    ok &= gated > 0;
    Ok((ok, parts.join("; ")))
}

pub fn norm_examples() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    let (h1, h2) = (4.0, 1.0);
    for (d, n) in [(2usize, 1usize), (2, 2), (3, 1), (3, 2)] {
        // local kernels live on one site; spinor sums run over d values
        let u = Universe::new(Lattice::cubic(d, 1), d, n)?;
        let w = WeightSystem::new(0.5, h1, h2, Metric::Euclidean)?;
        let quartic = kernel_norm(&u, &local_quartic_kernel(&u), &w);
        let source = kernel_norm(&u, &local_source_kernel(&u), &w);
        let (dq, ds) = ((d * d * n * n) as f64 * h1.powi(4), 2.0 * (d * n) as f64 * h1 * h2);
        ok &= (quartic - dq).abs() <= 1e-12 * dq && (source - ds).abs() <= 1e-12 * ds;
        let anti = coeff_norm(&u, &local_quartic_kernel(&u), &w);
        parts.push(format!("d={d} N={n}: {quartic} vs {dq}, {source} vs {ds} (antisymmetric quartic {anti})"));
    }
    Ok((ok, parts.join("; ")))
}

pub const LEMMA2_EPSILONS: [f64; 4] = [0.01, 0.05, 0.1, 0.12];

pub fn lemma2_sums() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in LEMMA2_EPSILONS {
        let start = Instant::now();
        let s = lemma2_partial_sum(eps, 6)?;
        let secs = start.elapsed().as_secs_f64();
        ok &= s <= lemma2_bound(eps) && secs < 10.0;
        parts.push(format!("eps={eps}: {s:.6} <= {:.6}", lemma2_bound(eps)));
    }
    Ok((ok, parts.join("; ")))
}

/// A sparse random coefficient system on a 3×3 lattice: a few entries, each
/// with 1–3 psi and 0–2 eta slots on neighbouring sites.
pub fn random_sparse_system(rng: &mut ChaCha8Rng, universe: &Universe) -> CoefficientSystem {
    let lattice = universe.lattice();
    let per = universe.per_site();
    let mut a = CoefficientSystem::new();
    let entries = rng.gen_range(2..=5);
    for _ in 0..entries {
        let center = rng.gen_range(0..lattice.volume());
        let pick = |rng: &mut ChaCha8Rng| {
            let axis = rng.gen_range(0..lattice.dim());
            let step = rng.gen_range(-1isize..=1);
            let site = lattice.shift(center, axis, step);
            (site * per + rng.gen_range(0..per)) as u8
        };
        let psi: Vec<u8> = (0..rng.gen_range(1..=3)).map(|_| pick(rng)).collect();
        let eta: Vec<u8> = (0..rng.gen_range(0..=2)).map(|_| pick(rng)).collect();
        let c = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        a.add_raw(&psi, &eta, c);
    }
    a
}

pub const LEMMA1_SYSTEMS: usize = 100;

pub fn lemma1_random() -> Result<(bool, String)> {
    let u = Universe::new(Lattice::cubic(2, 3), 2, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let trees2 = enumerate_trees(2)?;
    let trees3 = enumerate_trees(3)?;
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for i in 0..LEMMA1_SYSTEMS {
        let a = random_sparse_system(&mut rng, &u);
        let tree = if i % 2 == 0 { &trees2[0] } else { &trees3[rng.gen_range(0..trees3.len())] };
        let check = lemma1_check(&u, &a, tree, 1.0, 0.5, Metric::Euclidean)?;
        if !check.holds {
            violations += 1;
        }
        if check.rhs > 0.0 {
            worst = worst.max(check.lhs / check.rhs);
        }
    }
    Ok((violations == 0, format!("{violations} violations in {LEMMA1_SYSTEMS} systems, largest lhs/rhs {worst:.3}")))
}

pub fn tree_counts() -> Result<(bool, String)> {
    let mut ok = true;
    for n in 2..=7usize {
        let trees = enumerate_trees(n)?;
        let cayley = n.pow(n as u32 - 2);
        let mut by_degree = 0u128;
        compositions(n, 2 * (n - 1), &mut Vec::new(), &mut |d| by_degree += count_trees_with_degrees(d).unwrap_or(0));
        ok &= trees.len() == cayley && by_degree == cayley as u128;
    }
    Ok((ok, "n^(n-2) trees for n = 2..7, by enumeration and by degree sequences".into()))
}

fn compositions(parts: usize, total: usize, prefix: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if parts == 0 {
        if total == 0 {
            visit(prefix);
        }
        return;
    }
    for d in 1..=total.saturating_sub(parts - 1) {
        prefix.push(d);
        compositions(parts - 1, total - d, prefix, visit);
        prefix.pop();
    }
}

/// Every expansion produced by the suite's model runs, for the parity scan.
fn suite_log_series() -> Result<Vec<(String, LogSeries)>> {
    let mut out = Vec::new();
    for g in ORACLE_COUPLINGS {
        let cfg = gn_config(2, g);
        out.push((format!("2x2 g={g}"), expand(&cfg, &build_model(&cfg)?)?.log));
    }
    let mut cfg = gn_config(2, 0.05);
    cfg.expansion.mode = Mode::Truncated;
    out.push(("2x2 truncated".into(), expand(&cfg, &build_model(&cfg)?)?.log));
    let mut cfg = gn_config(4, 0.05);
    cfg.model.free = true;
    cfg.expansion.eta_degree = Some(2);
    out.push(("4x4 free".into(), expand(&cfg, &build_model(&cfg)?)?.log));
    let mut cfg = gn_config(3, 0.05);
    cfg.expansion.eta_degree = Some(2);
    cfg.expansion.max_polymer_sites = Some(4);
    out.push(("3x3 capped".into(), expand(&cfg, &build_model(&cfg)?)?.log));
    Ok(out)
}

pub fn parity() -> Result<(bool, String)> {
    let runs = suite_log_series()?;
    let mut ok = true;
    let mut scanned = 0;
    for (_, log) in &runs {
        scanned += log.element().len();
        ok &= log.element().terms().all(|(m, c)| m.degree() % 2 == 0 || c.norm() == 0.0);
    }
    Ok((ok, format!("{} series, {scanned} coefficients scanned", runs.len())))
}

pub fn free_theory() -> Result<(bool, String)> {
    let mut cfg = gn_config(4, 0.05);
    cfg.model.free = true;
    cfg.expansion.eta_degree = Some(2);
    let model = build_model(&cfg)?;
    let e = expand(&cfg, &model)?;
    let u = &model.universe;
    let s = u.spinor_dim();
    let mut worst: f64 = 0.0;
    for y1 in 0..u.lattice().volume() {
        for y2 in 0..u.lattice().volume() {
            for alpha in 0..s {
                for beta in 0..s {
                    let v = truncated_two_point(u, &e.log, cfg.model.g, y1, y2, alpha, beta, 0, 0)?;
                    let sv = model.covariance.entry(y1, alpha, y2, beta);
                    let scale = sv.norm().max(1e-15);
                    worst = worst.max((v - sv).norm() / scale);
                }
            }
        }
    }
    Ok((worst <= 1e-9, format!("largest relative deviation {worst:.2e} over all site and spinor pairs")))
}

pub fn covariance_decay() -> Result<(bool, String)> {
    let spec = LatticeSpec::cubic(2, 16, 1)?;
    let cov = covariance(&spec, 1.0)?;
    let fit = decay_fit(&cov.decay_table(Metric::Euclidean))?;
    Ok((fit.kappa > 0.0 && fit.r2 >= 0.95, format!("kappa_S = {:.4}, r2 = {:.4}, c = {:.4}", fit.kappa, fit.r2, fit.c)))
}

/// Largest polymer used for the 3×3 run (24 psi generators).
pub const THREE_BY_THREE_POLYMER_SITES: usize = 6;

pub fn decay_regime() -> Result<(bool, String)> {
    let mut fits = Vec::new();
    let mut parts = Vec::new();
    for l in [2usize, 3] {
        let mut cfg = gn_config(l, 0.05);
        cfg.expansion.eta_degree = Some(2);
        if l == 3 {
            cfg.expansion.max_polymer_sites = Some(THREE_BY_THREE_POLYMER_SITES);
        }
        let model = build_model(&cfg)?;
        let e = assemble_b(&model.universe, &model.v1.exponent(), &cfg.caps())?;
        let rows = correlation_table(&model.universe, &e.log, cfg.model.g, cfg.weights.metric)?;
        let fit = decay_fit(&envelope(rows.iter().map(|r| (r.distance, r.value.norm()))))?;
        parts.push(format!("L={l}: kappa_fit = {:.4}, r2 = {:.4}, exact = {}", fit.kappa, fit.r2, e.exact));
        fits.push(fit);
    }
    let m_f = RunConfig::default().model.m_f;
    let in_regime = fits.iter().all(|f| f.kappa > 0.0 && f.kappa <= m_f * 1.05);
    let spread = (fits[0].kappa - fits[1].kappa).abs() / fits[0].kappa.max(fits[1].kappa);
    parts.push(format!("relative spread {:.1}%", 100.0 * spread));
    Ok((in_regime && spread <= 0.15, parts.join("; ")))
}

pub fn determinism() -> Result<(bool, String)> {
    let cfg = RunConfig::default();
    let a = run_experiment(&cfg)?.stable_json();
    let b = run_experiment(&cfg)?.stable_json();
    Ok((a == b, format!("{} byte reports {}", a.len(), if a == b { "identical" } else { "differ" })))
}

pub fn golden_embedded() -> Result<(bool, String)> {
    Ok((true, golden::check(golden::EMBEDDED)?))
}
