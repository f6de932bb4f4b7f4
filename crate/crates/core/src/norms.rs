//! Weight systems, tree length and the weighted norms of coefficient systems.
//!
//! Pinning follows site overlap: the pinned point is a lattice site and an
//! entry counts for slot `i` (or `j`) when that slot sits on the pinned site.

use std::collections::BTreeMap;

use num_complex::Complex64;
use petgraph::algo::min_spanning_tree;
use petgraph::data::Element;
use petgraph::graph::UnGraph;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::berezin::LogSeries;
use crate::cluster::{for_each_tuple, tilde_a};
use crate::error::{Error, Result};
use crate::grassmann::{CoefficientSystem, GrassmannElement, Universe, ETA_OFFSET};
use crate::lattice::{Lattice, Metric, SiteSet};
use crate::trees::LabelledTree;

/// `w(ξ⃗, z⃗) = e^{κ t(supp)} h₁ⁿ h₂ᵐ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSystem {
    pub kappa: f64,
    pub h1: f64,
    pub h2: f64,
    pub metric: Metric,
}

impl WeightSystem {
    pub fn new(kappa: f64, h1: f64, h2: f64, metric: Metric) -> Result<Self> {
        if !(kappa >= 0.0 && h1 > 0.0 && h2 > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidArgument(format!("weights need kappa >= 0 and h1, h2 > 0 (got {kappa}, {h1}, {h2})")));
        }
        Ok(WeightSystem { kappa, h1, h2, metric })
    }

    pub fn weight(&self, lattice: &Lattice, support: SiteSet, n: usize, m: usize) -> f64 {
        let t = if self.kappa == 0.0 { 0.0 } else { tree_length(lattice, support, self.metric) };
        (self.kappa * t).exp() * self.h1.powi(n as i32) * self.h2.powi(m as i32)
    }
}

/// Minimum spanning tree length of a site set under the torus metric.
pub fn tree_length(lattice: &Lattice, sites: SiteSet, metric: Metric) -> f64 {
    let points: Vec<usize> = sites.iter().collect();
    if points.len() < 2 {
        return 0.0;
    }
    let mut g = UnGraph::<(), f64>::new_undirected();
    let nodes: Vec<_> = points.iter().map(|_| g.add_node(())).collect();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            g.add_edge(nodes[i], nodes[j], lattice.distance(points[i], points[j], metric));
        }
    }
    min_spanning_tree(&g)
        .filter_map(|e| match e {
            Element::Edge { weight, .. } => Some(weight),
            _ => None,
        })
        .sum()
}

struct TreeLengths<'a> {
    lattice: &'a Lattice,
    w: WeightSystem,
    cache: FxHashMap<SiteSet, f64>,
}

impl<'a> TreeLengths<'a> {
    fn new(lattice: &'a Lattice, w: WeightSystem) -> Self {
        TreeLengths { lattice, w, cache: FxHashMap::default() }
    }

    fn weight(&mut self, support: SiteSet, n: usize, m: usize) -> f64 {
        let (lattice, w) = (self.lattice, self.w);
        let t = *self.cache.entry(support).or_insert_with(|| tree_length(lattice, support, w.metric));
        (w.kappa * t).exp() * w.h1.powi(n as i32) * w.h2.powi(m as i32)
    }
}

fn block_sum(blocks: BTreeMap<(usize, usize), FxHashMap<(usize, usize, usize), f64>>, constant: f64) -> f64 {
    constant + blocks.values().map(|b| b.values().copied().fold(0.0, f64::max)).sum::<f64>()
}

/// `|a|_w` evaluated on the kernel exactly as stored, without antisymmetrizing.
pub fn kernel_norm(universe: &Universe, a: &CoefficientSystem, w: &WeightSystem) -> f64 {
    let per = universe.per_site();
    let mut lengths = TreeLengths::new(universe.lattice(), *w);
    let mut blocks: BTreeMap<(usize, usize), FxHashMap<(usize, usize, usize), f64>> = BTreeMap::new();
    let mut constant = 0.0;
    for (key, c) in a.entries() {
        let (n, m) = (key.0.len(), key.1.len());
        if n + m == 0 {
            constant += c.norm();
            continue;
        }
        let support = CoefficientSystem::entry_support(universe, key);
        let value = lengths.weight(support, n, m) * c.norm();
        let block = blocks.entry((n, m)).or_default();
        for p in support.iter() {
            let at_p = |b: &u8| *b as usize / per == p;
            let psi: Vec<bool> = key.0.iter().map(at_p).collect();
            let eta: Vec<bool> = key.1.iter().map(at_p).collect();
            for i in 0..n.max(1) {
                for j in 0..m.max(1) {
                    if psi.get(i).copied().unwrap_or(false) || eta.get(j).copied().unwrap_or(false) {
                        *block.entry((p, i, j)).or_default() += value;
                    }
                }
            }
        }
    }
    block_sum(blocks, constant)
}

/// `|a|_w` of the antisymmetric realization of a Grassmann element.
///
/// A canonical term `c ψ^P η^R` spreads `±c/(n! m!)` over the orderings of its
/// generators, so the pinned sum over orderings is `|c|` times the fraction of
/// orderings that put slot `i` or slot `j` on the pinned site.
pub fn element_norm(universe: &Universe, e: &GrassmannElement, w: &WeightSystem) -> f64 {
    let mut lengths = TreeLengths::new(universe.lattice(), *w);
    let mut blocks: BTreeMap<(usize, usize), FxHashMap<(usize, usize, usize), f64>> = BTreeMap::new();
    let constant = e.scalar_part().norm();
    for (mono, c) in e.terms() {
        let (n, m) = (mono.psi_degree() as usize, mono.eta_degree() as usize);
        let support = universe.support(mono);
        let value = lengths.weight(support, n, m) * c.norm();
        let mut u: FxHashMap<usize, (f64, f64)> = FxHashMap::default();
        for b in mono.bits() {
            let slot = u.entry(universe.site_of_bit(b)).or_default();
            if b >= ETA_OFFSET {
                slot.1 += 1.0;
            } else {
                slot.0 += 1.0;
            }
        }
        let block = blocks.entry((n, m)).or_default();
        for (p, (psi, eta)) in u {
            let fp = if n > 0 { psi / n as f64 } else { 0.0 };
            let fe = if m > 0 { eta / m as f64 } else { 0.0 };
            *block.entry((p, 0, 0)).or_default() += value * (1.0 - (1.0 - fp) * (1.0 - fe));
        }
    }
    block_sum(blocks, constant)
}

/// `|a|_w` with `a` replaced by its antisymmetric realization.
pub fn coeff_norm(universe: &Universe, a: &CoefficientSystem, w: &WeightSystem) -> f64 {
    element_norm(universe, &a.to_element(), w)
}

/// `|b|_{w_h}` over the stored entries of `log Ξ`, constant term excluded.
pub fn logseries_norm(universe: &Universe, b: &LogSeries, h: f64, kappa: f64, metric: Metric) -> Result<f64> {
    let w = WeightSystem::new(kappa, 1.0, h, metric)?;
    let coeffs = b.coefficients().filter(|k| !k.0.is_empty() || !k.1.is_empty());
    Ok(kernel_norm(universe, &coeffs, &w))
}

/// Largest number of tuples [`treesum_coeff`] will visit.
pub const MAX_TREESUM_TUPLES: usize = 5_000_000;

/// `a'_T(ξ⃗, z⃗) = Σ Π a(ξ⃗ᵢ, z⃗ᵢ)` over decompositions `ξ⃗ = ξ⃗₁∘⋯∘ξ⃗ₙ`,
/// `z⃗ = z⃗₁∘⋯∘z⃗ₙ` whose psi supports overlap along every edge of `T`.
pub fn treesum_coeff(universe: &Universe, a: &CoefficientSystem, tree: &LabelledTree) -> Result<CoefficientSystem> {
    let entries: Vec<_> = a.entries().map(|(k, c)| (k.clone(), c, CoefficientSystem::psi_support(universe, k))).collect();
    let n = tree.vertex_count();
    let visits = (entries.len() as f64).powi(n as i32);
    if visits > MAX_TREESUM_TUPLES as f64 {
        return Err(Error::Capacity(format!("tree sum over {} entries and {n} vertices exceeds {MAX_TREESUM_TUPLES} tuples", entries.len())));
    }
    let mut out = CoefficientSystem::new();
    for_each_tuple(entries.len(), n, |tuple| {
        if !tree.edges().iter().all(|&(u, v)| entries[tuple[u]].2.intersects(entries[tuple[v]].2)) {
            return;
        }
        let mut psi = Vec::new();
        let mut eta = Vec::new();
        let mut c = Complex64::new(1.0, 0.0);
        for &i in tuple {
            psi.extend_from_slice(&entries[i].0 .0);
            eta.extend_from_slice(&entries[i].0 .1);
            c *= entries[i].1;
        }
        out.add_raw(&psi, &eta, c);
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    NotApplicable,
}

const SLACK: f64 = 1.0 + 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Check {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|a'_T|_{w_{1,h}} ≤ d₁!⋯dₙ! |a|ⁿ_{w_{2,h}}`, both sides on the kernels as stored.
pub fn lemma1_check(
    universe: &Universe,
    a: &CoefficientSystem,
    tree: &LabelledTree,
    h: f64,
    kappa: f64,
    metric: Metric,
) -> Result<Lemma1Check> {
    let lhs = kernel_norm(universe, &treesum_coeff(universe, a, tree)?, &WeightSystem::new(kappa, 1.0, h, metric)?);
    let base = kernel_norm(universe, a, &WeightSystem::new(kappa, 2.0, h, metric)?);
    let factorials: f64 = tree.degrees().iter().map(|&d| (1..=d).map(|k| k as f64).product::<f64>()).product();
    let rhs = factorials * base.powi(tree.vertex_count() as i32);
    Ok(Lemma1Check { lhs, rhs, holds: lhs <= rhs * SLACK })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Check {
    /// `‖f‖_{w_{4,h}}`
    pub f_norm: f64,
    /// `‖H − H(0)‖_{w_h}`
    pub h_norm: f64,
    /// `‖f‖/(1 − 16‖f‖)` when `‖f‖ < 1/16`.
    pub bound: Option<f64>,
    pub verdict: Verdict,
}

/// `‖H − H(0)‖_{w_h} ≤ ‖f‖_{w_{4,h}} / (1 − 16‖f‖_{w_{4,h}})`, asserted only below `1/16`.
pub fn theorem1_check(
    universe: &Universe,
    a: &CoefficientSystem,
    b: &LogSeries,
    h: f64,
    kappa: f64,
    metric: Metric,
) -> Result<Theorem1Check> {
    let f_norm = coeff_norm(universe, a, &WeightSystem::new(kappa, 4.0, h, metric)?);
    let h_norm = logseries_norm(universe, b, h, kappa, metric)?;
    let bound = (f_norm < 1.0 / 16.0).then(|| f_norm / (1.0 - 16.0 * f_norm));
    let verdict = match bound {
        None => Verdict::NotApplicable,
        Some(r) if h_norm <= r * SLACK => Verdict::Holds,
        Some(_) => Verdict::Violated,
    };
    Ok(Theorem1Check { f_norm, h_norm, bound, verdict })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainedCheck {
    /// `|a|_{w_{4,h}}`
    pub f_norm: f64,
    /// `|ã|_{w_{2,h}}`
    pub tilde_norm: f64,
    pub bound: Option<f64>,
    pub verdict: Verdict,
}

/// Largest psi support for which [`chained_bound_check`] builds `ã` on every subset.
pub const MAX_CHAINED_SITES: usize = 6;

/// `|ã|_{w_{2,h}} ≤ |a|_{w_{4,h}} / (1 − 8|a|_{w_{4,h}})`, asserted only below `1/8`.
pub fn chained_bound_check(universe: &Universe, a: &CoefficientSystem, h: f64, kappa: f64, metric: Metric) -> Result<ChainedCheck> {
    let support = a.entries().fold(SiteSet::EMPTY, |s, (k, _)| s.union(CoefficientSystem::psi_support(universe, k)));
    if support.len() > MAX_CHAINED_SITES {
        return Err(Error::Capacity(format!("ã over {} sites exceeds {MAX_CHAINED_SITES}", support.len())));
    }
    let mut tilde = CoefficientSystem::new();
    for z in support.subsets().filter(|z| !z.is_empty()) {
        tilde = tilde.merge(&tilde_a(universe, a, z)?);
    }
    let f_norm = coeff_norm(universe, a, &WeightSystem::new(kappa, 4.0, h, metric)?);
    let tilde_norm = coeff_norm(universe, &tilde, &WeightSystem::new(kappa, 2.0, h, metric)?);
    let bound = (f_norm < 0.125).then(|| f_norm / (1.0 - 8.0 * f_norm));
    let verdict = match bound {
        None => Verdict::NotApplicable,
        Some(r) if tilde_norm <= r * SLACK => Verdict::Holds,
        Some(_) => Verdict::Violated,
    };
    Ok(ChainedCheck { f_norm, tilde_norm, bound, verdict })
}

/// `Σ_x Σ_{α,β,a,b} ψ̄_{αa}(x) ψ̄_{βb}(x) ψ_{αa}(x) ψ_{βb}(x)` as a raw kernel,
/// one entry per index tuple (diagonal tuples included).
pub fn local_quartic_kernel(universe: &Universe) -> CoefficientSystem {
    let modes = universe.spinor_dim() * universe.flavors();
    let mut out = CoefficientSystem::new();
    for x in 0..universe.lattice().volume() {
        let base = x * universe.per_site();
        for p in 0..modes {
            for q in 0..modes {
                let unbar = |k: usize| (base + 2 * k) as u8;
                let bar = |k: usize| (base + 2 * k + 1) as u8;
                out.add_raw(&[bar(p), bar(q), unbar(p), unbar(q)], &[], Complex64::new(1.0, 0.0));
            }
        }
    }
    out
}

/// `Σ_x Σ_{α,a} [ψ̄_{αa}(x) η_{αa}(x) + η̄_{αa}(x) ψ_{αa}(x)]` as a raw kernel.
pub fn local_source_kernel(universe: &Universe) -> CoefficientSystem {
    let modes = universe.spinor_dim() * universe.flavors();
    let mut out = CoefficientSystem::new();
    for x in 0..universe.lattice().volume() {
        let base = x * universe.per_site();
        for p in 0..modes {
            let (unbar, bar) = ((base + 2 * p) as u8, (base + 2 * p + 1) as u8);
            out.add_raw(&[bar], &[unbar], Complex64::new(1.0, 0.0));
            // η̄ψ = -ψη̄
            out.add_raw(&[unbar], &[bar], Complex64::new(-1.0, 0.0));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni(d: usize, l: usize, s: usize, n: usize) -> Universe {
        Universe::new(Lattice::cubic(d, l), s, n).unwrap()
    }

    #[test]
    fn tree_length_examples() {
        let lat = Lattice::cubic(2, 5);
        assert_eq!(tree_length(&lat, SiteSet::single(3), Metric::Euclidean), 0.0);
        let x = lat.site(&[0, 0]);
        let y = lat.site(&[0, 2]);
        let z = lat.site(&[1, 2]);
        let pair = SiteSet::from_sites([x, y]);
        assert!((tree_length(&lat, pair, Metric::Euclidean) - 2.0).abs() < 1e-12);
        // L-shape: legs 2 and 1, hypotenuse sqrt 5
        let triple = SiteSet::from_sites([x, y, z]);
        assert!((tree_length(&lat, triple, Metric::Euclidean) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn local_examples_under_raw_counting() {
        for (d, l, s, n) in [(2, 2, 2, 1), (2, 2, 2, 2), (3, 2, 3, 1)] {
            let u = uni(d, l, s, n);
            let w = WeightSystem::new(0.3, 4.0, 1.5, Metric::Euclidean).unwrap();
            let quartic = kernel_norm(&u, &local_quartic_kernel(&u), &w);
            let expected = (s * s * n * n) as f64 * 4f64.powi(4);
            assert!((quartic - expected).abs() < 1e-9 * expected, "{quartic} vs {expected}");
            let source = kernel_norm(&u, &local_source_kernel(&u), &w);
            let expected = (2 * s * n) as f64 * 4.0 * 1.5;
            assert!((source - expected).abs() < 1e-9 * expected);
        }
    }

    #[test]
    fn zero_system_has_zero_norm() {
        let u = uni(2, 2, 2, 1);
        let w = WeightSystem::new(0.5, 4.0, 1.0, Metric::Euclidean).unwrap();
        assert_eq!(coeff_norm(&u, &CoefficientSystem::new(), &w), 0.0);
        assert_eq!(kernel_norm(&u, &CoefficientSystem::new(), &w), 0.0);
    }

    #[test]
    fn closed_form_matches_materialized_antisymmetrization() {
        let u = uni(2, 2, 2, 1);
        let mut a = CoefficientSystem::new();
        a.add_raw(&[1, 8, 0], &[3], Complex64::new(0.7, -0.2));
        a.add_raw(&[0, 9], &[2, 11], Complex64::new(-1.3, 0.0));
        a.add_raw(&[17], &[16], Complex64::new(0.4, 0.1));
        let w = WeightSystem::new(0.4, 2.0, 1.3, Metric::Euclidean).unwrap();
        let direct = kernel_norm(&u, &a.antisymmetrize().unwrap(), &w);
        assert!((coeff_norm(&u, &a, &w) - direct).abs() < 1e-12 * direct.max(1.0));
    }

    #[test]
    fn single_pair_logseries_norm() {
        let u = uni(2, 3, 2, 1);
        let lat = u.lattice();
        let (x, y) = (lat.site(&[0, 0]), lat.site(&[1, 1]));
        let c = Complex64::new(0.3, 0.4);
        let z1 = (x * u.per_site()) as u32 + ETA_OFFSET;
        let z2 = (y * u.per_site() + 1) as u32 + ETA_OFFSET;
        let e = GrassmannElement::monomial(crate::grassmann::Monomial(1u128 << z1 | 1u128 << z2), c);
        let b = LogSeries::from_element(e);
        let r = 2f64.sqrt();
        let got = logseries_norm(&u, &b, 1.7, 0.6, Metric::Euclidean).unwrap();
        let expected = c.norm() * 1.7 * 1.7 * (0.6 * r).exp();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn theorem_gate() {
        let u = uni(2, 2, 2, 1);
        let zero = theorem1_check(&u, &CoefficientSystem::new(), &LogSeries::from_element(GrassmannElement::zero()), 1.0, 0.5, Metric::Euclidean).unwrap();
        assert_eq!((zero.f_norm, zero.h_norm, zero.verdict), (0.0, 0.0, Verdict::Holds));
        let big = theorem1_check(&u, &local_source_kernel(&u), &LogSeries::from_element(GrassmannElement::zero()), 1.0, 0.5, Metric::Euclidean).unwrap();
        assert_eq!(big.verdict, Verdict::NotApplicable);
    }
}
