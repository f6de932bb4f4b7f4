//! Connected covers, polymer activities `K₀(Z, η)`, the Ursell function and the
//! assembly of `b(z⃗)` for `log ∫dμ_I exp(f)`.
//!
//! The expansion runs in three stages:
//!
//! 1. Polymers are the site sets reachable as unions of overlapping psi supports
//!    of the terms of `f` (subject to the size and diameter caps).
//! 2. For each polymer `Z` the activity `K₀(Z)` is the integrated sum over
//!    connected covers of `Z`. It is extracted from the restricted integrals
//!    `E(W) = ∫ exp(f_W)` through the exponential formula
//!    `E(W) = Σ_{disjoint families in W} Π K₀`, which holds because the unit
//!    covariance measure factorizes over disjoint supports.
//! 3. `log` of the polymer gas. The order-`n` cluster term
//!    `1/n! Σ ρᵀ(Z₁..Zₙ) Π K₀(Zⱼ)` is the `λⁿ` coefficient of `log Ξ(λ)` where each
//!    activity carries a factor `λ`; full depth evaluates the resummed series at
//!    `λ = 1`.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::berezin::{integrate_element, integrate_exp_split, is_balanced, log_nilpotent, split_exponent, Grades, LogSeries};
use crate::error::{Error, Result};
use crate::grassmann::{CoefficientSystem, GrassmannElement, IndexVector, Monomial, Universe};
use crate::lattice::{Metric, SiteSet};

/// Graph on polymer labels with an edge whenever two supports intersect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceGraph {
    pub vertex_count: usize,
    pub edges: BTreeSet<(usize, usize)>,
    pub connected: bool,
}

impl IncidenceGraph {
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }
}

pub fn incidence_graph(supports: &[SiteSet]) -> IncidenceGraph {
    let n = supports.len();
    let mut edges = BTreeSet::new();
    let mut uf = UnionFind::<usize>::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if supports[i].intersects(supports[j]) {
                edges.insert((i, j));
                uf.union(i, j);
            }
        }
    }
    let connected = n > 0 && (1..n).all(|i| uf.equiv(0, i));
    IncidenceGraph { vertex_count: n, edges, connected }
}

fn connected_union(supports: &[SiteSet]) -> Option<SiteSet> {
    incidence_graph(supports).connected.then(|| supports.iter().fold(SiteSet::EMPTY, |u, s| u.union(*s)))
}

/// All ordered `k`-tuples (as candidate indices) whose supports union to exactly
/// `z` with a connected incidence graph.
pub fn connected_covers(z: SiteSet, candidates: &[IndexVector], k: usize) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::InvalidArgument("cover size must be at least 1".into()));
    }
    let supports: Vec<SiteSet> = candidates.iter().map(|c| c.support()).collect();
    let mut out = Vec::new();
    for_each_tuple(supports.len(), k, |tuple| {
        let sup: Vec<SiteSet> = tuple.iter().map(|&i| supports[i]).collect();
        if connected_union(&sup) == Some(z) {
            out.push(tuple.to_vec());
        }
    });
    Ok(out)
}

pub(crate) fn for_each_tuple<F: FnMut(&[usize])>(n: usize, k: usize, mut visit: F) {
    if n == 0 {
        return;
    }
    let mut idx = vec![0usize; k];
    loop {
        visit(&idx);
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Hard-core Ursell function: the sum over connected spanning subgraphs `g` of
/// the incidence graph of `(-1)^{|E(g)|}`. Zero when the graph is disconnected.
pub fn ursell_rho_t(supports: &[SiteSet]) -> i64 {
    let n = supports.len();
    assert!(n <= 20, "Ursell function limited to 20 arguments");
    if n == 0 {
        return 0;
    }
    let adj: Vec<u32> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && supports[i].intersects(supports[j])).fold(0u32, |m, j| m | 1 << j))
        .collect();
    let independent = |s: u32| {
        let mut rest = s;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if adj[i] & s != 0 {
                return false;
            }
        }
        true
    };
    let full = (1u32 << n) - 1;
    let mut connected = vec![0i64; 1 << n];
    for s in 1..=full {
        let low = s & s.wrapping_neg();
        let mut value = independent(s) as i64;
        // proper subsets T of s containing the lowest element
        let rest = s & !low;
        let mut t = rest;
        loop {
            t = (t.wrapping_sub(1)) & rest;
            let block = t | low;
            if block != s {
                value -= connected[block as usize] * independent(s & !block) as i64;
            }
            if t == 0 {
                break;
            }
        }
        connected[s as usize] = value;
    }
    connected[full as usize]
}

/// A polymer: a site set together with the terms supported inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Polymer {
    pub support: SiteSet,
    pub terms: Vec<(Monomial, Complex64)>,
}

/// Caps on the expansion. `None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCaps {
    /// Highest cluster order `n` kept in the `ρᵀ` series; `None` resums all orders.
    pub n_max: Option<usize>,
    /// Highest number of kernel factors `k` per connected cover.
    pub k_max: Option<usize>,
    pub max_diameter: Option<f64>,
    pub max_polymer_sites: Option<usize>,
    /// Highest eta degree retained. Lower-degree coefficients stay exact.
    pub eta_degree: Option<u32>,
    pub metric: Metric,
}

impl Default for ExpansionCaps {
    fn default() -> Self {
        ExpansionCaps { n_max: None, k_max: None, max_diameter: None, max_polymer_sites: None, eta_degree: None, metric: Metric::Euclidean }
    }
}

/// Psi generators a single polymer may carry.
pub const MAX_POLYMER_PSI: usize = 24;

/// Result of [`assemble_b`].
#[derive(Debug, Clone)]
pub struct Expansion {
    pub log: LogSeries,
    /// True when no cap altered any retained coefficient.
    pub exact: bool,
    pub notes: Vec<String>,
    pub polymer_count: usize,
    /// Activities `K₀(Z, η)` by polymer support.
    pub activities: BTreeMap<SiteSet, GrassmannElement>,
}

type Graded = Vec<GrassmannElement>;

fn graded_mul(a: &Graded, b: &Graded, grades: Grades, eta_cap: Option<u32>) -> Graded {
    let mut out = vec![GrassmannElement::zero(); grades.slots()];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            if let Some(k) = grades.step(i as u8, j as u8) {
                out[k as usize].add_assign(&x.mul_capped(y, eta_cap));
            }
        }
    }
    out
}

fn graded_one(grades: Grades) -> Graded {
    let mut v = vec![GrassmannElement::zero(); grades.slots()];
    v[0] = GrassmannElement::one();
    v
}

fn collapse(g: &Graded) -> GrassmannElement {
    g.iter().fold(GrassmannElement::zero(), |acc, x| acc.add(x))
}

/// Partition function of a gas of pairwise disjoint polymers inside `w`.
fn gas(
    w: SiteSet,
    polymers: &[(SiteSet, Graded)],
    grades: Grades,
    eta_cap: Option<u32>,
    memo: &mut FxHashMap<SiteSet, Graded>,
) -> Graded {
    if w.is_empty() {
        return graded_one(grades);
    }
    if let Some(v) = memo.get(&w) {
        return v.clone();
    }
    let w0 = w.first().unwrap();
    let mut total = gas(w.minus(SiteSet::single(w0)), polymers, grades, eta_cap, memo);
    for (p, act) in polymers {
        if p.contains(w0) && p.is_subset_of(w) {
            let rest = gas(w.minus(*p), polymers, grades, eta_cap, memo);
            for (slot, v) in total.iter_mut().zip(graded_mul(act, &rest, grades, eta_cap)) {
                slot.add_assign(&v);
            }
        }
    }
    memo.insert(w, total.clone());
    total
}

struct PolymerSet {
    polymers: Vec<SiteSet>,
    truncated: bool,
}

fn enumerate_polymers(universe: &Universe, seeds: &BTreeSet<SiteSet>, caps: &ExpansionCaps) -> PolymerSet {
    let allowed = |s: SiteSet| {
        caps.max_polymer_sites.is_none_or(|m| s.len() <= m)
            && caps.max_diameter.is_none_or(|d| universe.lattice().diameter(s, caps.metric) <= d + 1e-12)
    };
    let mut truncated = false;
    let mut found: BTreeSet<SiteSet> = BTreeSet::new();
    let mut frontier: Vec<SiteSet> = Vec::new();
    for &s in seeds {
        if allowed(s) {
            found.insert(s);
            frontier.push(s);
        } else {
            truncated = true;
        }
    }
    while let Some(p) = frontier.pop() {
        for &s in seeds {
            if s.intersects(p) && !s.is_subset_of(p) {
                let q = p.union(s);
                if !allowed(q) {
                    truncated = true;
                } else if found.insert(q) {
                    frontier.push(q);
                }
            }
        }
    }
    let mut polymers: Vec<SiteSet> = found.into_iter().collect();
    polymers.sort_by_key(|s| (s.len(), s.0));
    PolymerSet { polymers, truncated }
}

/// Activities `K₀(Z, η)` for every polymer of the even exponent `f`, together
/// with the pieces of `f` that factor out of the integral.
pub struct Activities {
    pub map: BTreeMap<SiteSet, GrassmannElement>,
    pub truncated: bool,
    pub notes: Vec<String>,
}

pub fn polymer_activities(universe: &Universe, f: &GrassmannElement, caps: &ExpansionCaps) -> Result<Activities> {
    let split = split_exponent(f)?;
    let mut notes = Vec::new();
    let terms: Vec<(Monomial, Complex64, SiteSet)> = split
        .psi
        .iter()
        .map(|&(m, c)| (m, c, universe.psi_support(m), false))
        .chain(split.mix.iter().map(|&(m, c)| (m, c, universe.psi_support(m), true)))
        .map(|(m, c, s, _)| (m, c, s))
        .collect();
    let seeds: BTreeSet<SiteSet> = terms.iter().map(|t| t.2).collect();
    let set = enumerate_polymers(universe, &seeds, caps);
    let mut truncated = set.truncated;
    if set.truncated {
        notes.push("polymers beyond the size/diameter caps were dropped".into());
    }
    for p in &set.polymers {
        let psi = p.len() * universe.per_site();
        if psi > MAX_POLYMER_PSI {
            return Err(Error::Capacity(format!(
                "polymer with {} sites carries {psi} psi generators (limit {MAX_POLYMER_PSI}); lower the lattice size or set max_polymer_sites",
                p.len()
            )));
        }
    }
    let grades = match caps.k_max {
        Some(k) => {
            let bound = set.polymers.iter().map(|p| p.len() * universe.per_site() / 2).max().unwrap_or(0);
            if k < bound {
                truncated = true;
                notes.push(format!("connected covers truncated at k = {k} (nilpotency bound {bound})"));
                Grades::UpTo(k)
            } else {
                Grades::Full
            }
        }
        None => Grades::Full,
    };

    let restricted: Vec<Graded> = set
        .polymers
        .par_iter()
        .map(|&w| {
            let psi: Vec<_> = split.psi.iter().copied().filter(|(m, _)| universe.psi_support(*m).is_subset_of(w)).collect();
            let mix: Vec<_> = split.mix.iter().copied().filter(|(m, _)| universe.psi_support(*m).is_subset_of(w)).collect();
            integrate_exp_split(&psi, &mix, caps.eta_degree, grades)
        })
        .collect();

    let mut known: Vec<(SiteSet, Graded)> = Vec::new();
    let mut memo: FxHashMap<SiteSet, Graded> = FxHashMap::default();
    let mut map = BTreeMap::new();
    for (z, e) in set.polymers.iter().zip(restricted) {
        let others = gas(*z, &known, grades, caps.eta_degree, &mut memo);
        let k0: Graded = e.iter().zip(&others).map(|(a, b)| a.sub(b)).collect();
        memo.insert(*z, e);
        map.insert(*z, collapse(&k0));
        known.push((*z, k0));
    }
    Ok(Activities { map, truncated, notes })
}

/// `K₀(Z, η)` for the kernel `a` (exponent `f = Σ a ψ η`), truncated at `k_max`
/// kernel factors when given.
pub fn k0(universe: &Universe, z: SiteSet, a: &CoefficientSystem, k_max: Option<usize>) -> Result<GrassmannElement> {
    if k_max == Some(0) {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let f = a.to_element();
    let local = GrassmannElement::from_terms(
        f.terms().filter(|(m, _)| m.psi_degree() > 0 && universe.psi_support(*m).is_subset_of(z)),
    );
    let caps = ExpansionCaps { k_max, ..Default::default() };
    let acts = polymer_activities(universe, &local, &caps)?;
    Ok(acts.map.get(&z).cloned().unwrap_or_default())
}

/// Literal `K₀(Z, η) = Σ_k 1/k! Σ_{covers} ∫ Π a_η(ξ⃗ᵢ) ψ(ξ⃗ᵢ)` by enumerating
/// ordered tuples of kernel entries. Exponential in `k`; intended for small inputs.
pub fn k0_by_covers(universe: &Universe, z: SiteSet, a: &CoefficientSystem, k_max: usize) -> Result<GrassmannElement> {
    let terms: Vec<(GrassmannElement, SiteSet)> = a
        .entries()
        .filter(|(k, _)| !k.0.is_empty())
        .map(|(k, c)| {
            let mut single = CoefficientSystem::new();
            single.add_raw(&k.0, &k.1, c);
            (single.to_element(), CoefficientSystem::psi_support(universe, k))
        })
        .filter(|(_, s)| s.is_subset_of(z))
        .collect();
    let mut total = GrassmannElement::zero();
    let mut factorial = 1.0;
    for k in 1..=k_max {
        factorial *= k as f64;
        let mut order = GrassmannElement::zero();
        for_each_tuple(terms.len(), k, |tuple| {
            let sup: Vec<SiteSet> = tuple.iter().map(|&i| terms[i].1).collect();
            if connected_union(&sup) != Some(z) {
                return;
            }
            let prod = tuple.iter().fold(GrassmannElement::one(), |acc, &i| acc.mul(&terms[i].0));
            order.add_assign(&integrate_element(&prod));
        });
        total.add_assign(&order.scale(Complex64::new(1.0 / factorial, 0.0)));
    }
    Ok(total)
}

/// The kernel `ã(ξ⃗, z⃗)` with `supp ξ⃗ = Z`: the connected part of `exp(f)` on `Z`
/// before integration, each psi monomial weighted by its integral.
/// `Σ ã(ξ⃗, z⃗) η(z⃗) = K₀(Z, η)`.
pub fn tilde_a(universe: &Universe, a: &CoefficientSystem, z: SiteSet) -> Result<CoefficientSystem> {
    let f = a.to_element();
    let terms: Vec<(Monomial, Complex64, SiteSet)> = f
        .terms()
        .filter(|(m, _)| m.psi_degree() > 0)
        .map(|(m, c)| (m, c, universe.psi_support(m)))
        .filter(|t| t.2.is_subset_of(z))
        .collect();
    let used = terms.iter().fold(0u128, |s, t| s | t.0 .0).count_ones();
    if used > 26 {
        return Err(Error::Capacity(format!("tilde_a on {used} generators exceeds the joint-algebra limit of 26")));
    }
    let seeds: BTreeSet<SiteSet> = terms.iter().map(|t| t.2).collect();
    let set = enumerate_polymers(universe, &seeds, &ExpansionCaps::default());
    if !set.polymers.contains(&z) {
        return Ok(CoefficientSystem::new());
    }
    let mut known: Vec<(SiteSet, Graded)> = Vec::new();
    let mut memo: FxHashMap<SiteSet, Graded> = FxHashMap::default();
    let mut connected = GrassmannElement::zero();
    for w in set.polymers.iter().filter(|w| w.is_subset_of(z)) {
        let fw = GrassmannElement::from_terms(terms.iter().filter(|t| t.2.is_subset_of(*w)).map(|t| (t.0, t.1)));
        let e = vec![fw.exp_series()?];
        let others = gas(*w, &known, Grades::Full, None, &mut memo);
        let kw = vec![e[0].sub(&others[0])];
        memo.insert(*w, e);
        if *w == z {
            connected = kw[0].clone();
        }
        known.push((*w, kw));
    }
    let mut out = CoefficientSystem::new();
    for (m, c) in connected.terms() {
        if is_balanced(m.psi_part().0) {
            let (psi, eta) = crate::grassmann::monomial_key(m);
            out.add_raw(&psi, &eta, c);
        }
    }
    Ok(out)
}

/// Cluster terms `C_n = 1/n! Σ_{(Z₁..Zₙ)} ρᵀ Π K₀(Zⱼ)` for `n = 1..=n_max`, via
/// the `λ`-graded logarithm of the polymer gas.
pub fn cluster_orders(
    activities: &BTreeMap<SiteSet, GrassmannElement>,
    n_max: usize,
    eta_cap: Option<u32>,
) -> Vec<GrassmannElement> {
    let grades = Grades::UpTo(n_max);
    let polymers: Vec<(SiteSet, Graded)> = activities
        .iter()
        .map(|(s, k)| {
            let mut v = vec![GrassmannElement::zero(); grades.slots()];
            if n_max >= 1 {
                v[1] = k.clone();
            }
            (*s, v)
        })
        .collect();
    let all = activities.keys().fold(SiteSet::EMPTY, |u, s| u.union(*s));
    let xi = gas(all, &polymers, grades, eta_cap, &mut FxHashMap::default());
    // n C_n = n Ξ_n - Σ_{k<n} k C_k Ξ_{n-k}
    let mut c: Vec<GrassmannElement> = vec![GrassmannElement::zero()];
    for n in 1..=n_max {
        let mut acc = xi[n].scale(Complex64::new(n as f64, 0.0));
        for k in 1..n {
            acc = acc.sub(&c[k].mul_capped(&xi[n - k], eta_cap).scale(Complex64::new(k as f64, 0.0)));
        }
        c.push(acc.scale(Complex64::new(1.0 / n as f64, 0.0)));
    }
    c.remove(0);
    c
}

/// Literal order-`n` cluster term by enumerating ordered `n`-tuples of polymers.
pub fn cluster_order_by_ursell(
    activities: &[(SiteSet, GrassmannElement)],
    n: usize,
    eta_cap: Option<u32>,
) -> GrassmannElement {
    let mut total = GrassmannElement::zero();
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    for_each_tuple(activities.len(), n, |tuple| {
        let sup: Vec<SiteSet> = tuple.iter().map(|&i| activities[i].0).collect();
        let rho = ursell_rho_t(&sup);
        if rho == 0 {
            return;
        }
        let prod = tuple.iter().fold(GrassmannElement::one(), |acc, &i| acc.mul_capped(&activities[i].1, eta_cap));
        total.add_assign(&prod.scale(Complex64::new(rho as f64 / factorial, 0.0)));
    });
    total
}

/// `b(z⃗)` for `log ∫dμ_I exp(f)` with `f = Σ a(ξ⃗, z⃗) ψ(ξ⃗) η(z⃗)`.
pub fn assemble_b(universe: &Universe, a: &CoefficientSystem, caps: &ExpansionCaps) -> Result<Expansion> {
    if caps.n_max == Some(0) || caps.k_max == Some(0) {
        return Err(Error::InvalidArgument("n_max and k_max must be at least 1".into()));
    }
    let f = a.to_element();
    let split = split_exponent(&f)?;
    let acts = polymer_activities(universe, &f, caps)?;
    let mut notes = acts.notes.clone();
    let mut exact = !acts.truncated;

    let mut log = match caps.n_max {
        None => {
            let polymers: Vec<(SiteSet, Graded)> = acts.map.iter().map(|(s, k)| (*s, vec![k.clone()])).collect();
            let all = acts.map.keys().fold(SiteSet::EMPTY, |u, s| u.union(*s));
            let xi = gas(all, &polymers, Grades::Full, caps.eta_degree, &mut FxHashMap::default()).remove(0);
            log_nilpotent(&xi, caps.eta_degree)?.element().clone()
        }
        Some(n) => {
            exact = false;
            notes.push(format!("cluster series truncated at order n = {n}"));
            cluster_orders(&acts.map, n, caps.eta_degree).iter().fold(GrassmannElement::zero(), |s, c| s.add(c))
        }
    };
    let mut outside = split.eta.clone();
    outside.set_scalar(split.scalar);
    log.add_assign(&match caps.eta_degree {
        Some(cap) => outside.truncate_eta(cap),
        None => outside,
    });
    if let Some(cap) = caps.eta_degree {
        notes.push(format!("coefficients above eta degree {cap} not computed"));
    }
    Ok(Expansion {
        log: LogSeries::from_element(log),
        exact,
        notes,
        polymer_count: acts.map.len(),
        activities: acts.map,
    })
}
