//! Exact Gaussian Berezin integration with unit covariance.
//!
//! Convention: in canonical order every psi pair reads `ψ_i ψ̄_i` and
//! `∫dμ_I ψ_i ψ̄_i = +1`, so a canonical psi monomial integrates to `+1` when it
//! is a union of complete pairs and to `0` otherwise. Equivalently
//! `∫dμ_I ψ̄_i ψ_i = -1`, the sign produced by `exp(-⟨ψ̄, ψ⟩)`.

use num_complex::Complex64;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::grassmann::{merge_sign, CoefficientSystem, GeneratorIndex, GrassmannElement, Monomial, Universe};

const UNBAR_BITS: u128 = 0x5555_5555_5555_5555;

/// `true` when the psi mask is a union of complete `(ψ_i, ψ̄_i)` pairs.
#[inline]
pub(crate) fn is_balanced(psi: u128) -> bool {
    psi & UNBAR_BITS == (psi >> 1) & UNBAR_BITS
}

/// `∫dμ_I` of a canonical psi monomial.
pub fn integrate_monomial(m: Monomial) -> Result<Complex64> {
    if m.eta_degree() > 0 {
        return Err(Error::InvalidArgument("spectator generators cannot be integrated".into()));
    }
    Ok(Complex64::new(if is_balanced(m.0) { 1.0 } else { 0.0 }, 0.0))
}

/// Integrates out every psi generator; eta generators pass through.
pub fn integrate_element(f: &GrassmannElement) -> GrassmannElement {
    let mut out = GrassmannElement::scalar(f.scalar_part());
    for (m, c) in f.terms() {
        if is_balanced(m.psi_part().0) {
            out.add_term(m.eta_part(), c);
        }
    }
    out
}

/// `∫dμ_I ψ_{u_1} ψ̄_{b_1} ⋯ ψ_{u_n} ψ̄_{b_n} = det[δ(u_i, b_j)]`, labels being
/// `(site, spinor, flavor)` triples.
pub fn pairing_determinant(bar: &[(usize, usize, usize)], unbar: &[(usize, usize, usize)]) -> Result<f64> {
    if bar.len() != unbar.len() {
        return Err(Error::InvalidArgument("pairing needs equally many barred and unbarred fields".into()));
    }
    let n = bar.len();
    if n == 0 {
        return Ok(1.0);
    }
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| if unbar[i] == bar[j] { 1.0f64 } else { 0.0 });
    Ok(m.determinant().round())
}

/// `log Ξ(η)` as a scalar plus a nilpotent eta element.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogSeries {
    element: GrassmannElement,
}

impl LogSeries {
    pub fn from_element(element: GrassmannElement) -> Self {
        LogSeries { element }
    }

    /// `b₀ = log Ξ(0)`.
    pub fn constant(&self) -> Complex64 {
        self.element.scalar_part()
    }

    /// The full element, constant included.
    pub fn element(&self) -> &GrassmannElement {
        &self.element
    }

    /// The non-constant part `H - H(0)`.
    pub fn fluctuation(&self) -> GrassmannElement {
        let mut e = self.element.clone();
        e.set_scalar(Complex64::default());
        e
    }

    /// Coefficient system `b(z⃗)`, one entry per canonical eta monomial.
    pub fn coefficients(&self) -> CoefficientSystem {
        CoefficientSystem::from_element(&self.fluctuation())
    }

    /// Coefficient of an ordered product of eta generators.
    pub fn coefficient_of(&self, universe: &Universe, z: &[GeneratorIndex]) -> Result<Complex64> {
        self.element.coefficient_of(universe, z)
    }

    /// Largest coefficient magnitude on an odd number of eta generators.
    pub fn max_odd_coefficient(&self) -> f64 {
        self.element.terms().filter(|(m, _)| m.degree() % 2 == 1).map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }
}

/// Logarithm of an eta-valued element with nonzero scalar part: the complex log of
/// the scalar plus the terminating series in the nilpotent remainder.
pub fn log_nilpotent(xi: &GrassmannElement, eta_cap: Option<u32>) -> Result<LogSeries> {
    let x0 = xi.scalar_part();
    if x0.norm() == 0.0 {
        return Err(Error::SingularNormalization);
    }
    let mut r = xi.scale(x0.inv());
    r.set_scalar(Complex64::default());
    let mut out = GrassmannElement::scalar(x0.ln());
    let mut power = r.clone();
    let mut k = 1;
    while !power.is_zero() {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out.add_assign(&power.scale(Complex64::new(sign / k as f64, 0.0)));
        k += 1;
        power = power.mul_capped(&r, eta_cap);
    }
    Ok(LogSeries::from_element(out))
}

/// Sparse graded accumulator keyed by `(monomial, grade)`.
pub(crate) type GradedMap = FxHashMap<(u128, u8), Complex64>;

/// Grade bookkeeping for truncated exponentials. `Full` keeps a single grade
/// (no truncation); `UpTo(k)` tracks the number of factors up to `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Grades {
    Full,
    UpTo(usize),
}

impl Grades {
    pub(crate) fn slots(self) -> usize {
        match self {
            Grades::Full => 1,
            Grades::UpTo(k) => k + 1,
        }
    }

    #[inline]
    pub(crate) fn step(self, g: u8, by: u8) -> Option<u8> {
        match self {
            Grades::Full => Some(0),
            Grades::UpTo(k) => {
                let n = g + by;
                (n as usize <= k).then_some(n)
            }
        }
    }
}

/// `exp(Σ t)` for commuting even monomial terms, as `Π (1 + t)`.
pub(crate) fn exp_terms(terms: &[(Monomial, Complex64)], eta_cap: Option<u32>, grades: Grades) -> GradedMap {
    let mut acc: GradedMap = FxHashMap::default();
    acc.insert((0, 0), Complex64::new(1.0, 0.0));
    for &(t, ct) in terms {
        let te = t.eta_degree();
        if eta_cap.is_some_and(|cap| te > cap) {
            continue;
        }
        let mut add: Vec<((u128, u8), Complex64)> = Vec::new();
        for (&(m, g), &c) in &acc {
            if m & t.0 != 0 {
                continue;
            }
            if eta_cap.is_some_and(|cap| Monomial(m).eta_degree() + te > cap) {
                continue;
            }
            let Some(ng) = grades.step(g, 1) else { continue };
            add.push(((m | t.0, ng), c * ct * merge_sign(m, t.0) as f64));
        }
        for (k, v) in add {
            *acc.entry(k).or_default() += v;
        }
    }
    acc
}

/// `∫dμ_I exp(f_psi) exp(f_mix)` where `f_psi` has psi generators only and
/// every `f_mix` term carries both families. Returns one eta element per grade.
///
/// The psi exponential `G` is contracted against each psi part `P` of the mixed
/// exponential through the moments `Φ(P) = ∫ G ψ^P`, which avoids forming the
/// joint product.
pub(crate) fn integrate_exp_split(
    psi_terms: &[(Monomial, Complex64)],
    mix_terms: &[(Monomial, Complex64)],
    eta_cap: Option<u32>,
    grades: Grades,
) -> Vec<GrassmannElement> {
    let g = exp_terms(psi_terms, None, grades);
    let m = exp_terms(mix_terms, eta_cap, grades);
    let g_support = g.keys().fold(0u128, |s, (k, _)| s | k);
    let slots = grades.slots();
    let mut phi_cache: FxHashMap<u128, Vec<Complex64>> = FxHashMap::default();
    let mut out: Vec<FxHashMap<u128, Complex64>> = vec![FxHashMap::default(); slots];

    // deterministic traversal of the mixed expansion
    let mut keys: Vec<&(u128, u8)> = m.keys().collect();
    keys.sort_unstable();
    for key in keys {
        let (mono, grade) = *key;
        let coeff = m[key];
        let psi = Monomial(mono).psi_part().0;
        let eta = Monomial(mono).eta_part().0;
        let phi = phi_cache.entry(psi).or_insert_with(|| moments(&g, g_support, psi, grades));
        for (j, pj) in phi.iter().enumerate() {
            if pj.norm() == 0.0 {
                continue;
            }
            let Some(total) = grades.step(grade, j as u8) else { continue };
            *out[total as usize].entry(eta).or_default() += coeff * pj;
        }
    }
    out.into_iter().map(GrassmannElement::from_hash).collect()
}

/// `Φ_j(P) = Σ_A G_{A,j} ∫ ψ^A ψ^P`, one value per grade `j`.
fn moments(g: &GradedMap, g_support: u128, p: u128, grades: Grades) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); grades.slots()];
    let unbar = p & UNBAR_BITS;
    let bar = (p >> 1) & UNBAR_BITS;
    let unmatched = unbar ^ bar;
    let required = (unmatched & unbar) << 1 | (unmatched & bar);
    // pair slots (low bit positions) present neither in P nor forced
    let occupied = unbar | bar;
    let g_pairs = (g_support | g_support >> 1) & UNBAR_BITS;
    let free = g_pairs & !occupied;
    let free_bits: Vec<u32> = Monomial(free).bits().collect();
    for subset in 0u64..(1u64 << free_bits.len()) {
        let mut a = required;
        for (i, &b) in free_bits.iter().enumerate() {
            if subset >> i & 1 == 1 {
                a |= 0b11u128 << b;
            }
        }
        let s = merge_sign(a, p);
        if s == 0 {
            continue;
        }
        for (j, slot) in out.iter_mut().enumerate() {
            if let Some(c) = g.get(&(a, j as u8)) {
                *slot += c * s as f64;
            }
        }
    }
    out
}

/// Splits an even element into scalar, psi-only, mixed and eta-only terms.
pub(crate) struct SplitExponent {
    pub scalar: Complex64,
    pub psi: Vec<(Monomial, Complex64)>,
    pub mix: Vec<(Monomial, Complex64)>,
    pub eta: GrassmannElement,
}

pub(crate) fn split_exponent(f: &GrassmannElement) -> Result<SplitExponent> {
    if !f.is_even() {
        return Err(Error::OddTerm);
    }
    let mut out = SplitExponent { scalar: f.scalar_part(), psi: Vec::new(), mix: Vec::new(), eta: GrassmannElement::zero() };
    for (m, c) in f.terms() {
        match (m.psi_degree() > 0, m.eta_degree() > 0) {
            (true, false) => out.psi.push((m, c)),
            (true, true) => out.mix.push((m, c)),
            _ => out.eta.add_term(m, c),
        }
    }
    Ok(out)
}

/// `∫dμ_I g·m` for a psi-only `g`, computed as [`integrate_element`] of the
/// product without materializing it.
pub fn integrate_product(g: &GrassmannElement, m: &GrassmannElement) -> Result<GrassmannElement> {
    if !g.is_psi_only() {
        return Err(Error::InvalidArgument("left factor must contain psi generators only".into()));
    }
    let mut gm: GradedMap = FxHashMap::default();
    for (k, c) in g.iter_all() {
        gm.insert((k.0, 0), c);
    }
    let support = gm.keys().fold(0u128, |s, (k, _)| s | k);
    let mut out = GrassmannElement::zero();
    for (k, c) in m.iter_all() {
        let phi = moments(&gm, support, k.psi_part().0, Grades::Full)[0];
        out.add_term(k.eta_part(), c * phi);
    }
    Ok(out)
}

/// `Ξ(η) = ∫dμ_I exp(f)` for an even `f`, optionally in the quotient that drops
/// monomials with more than `eta_cap` eta generators.
pub fn gaussian_exp_integral(f: &GrassmannElement, eta_cap: Option<u32>) -> Result<GrassmannElement> {
    let split = split_exponent(f)?;
    let mut xi = integrate_exp_split(&split.psi, &split.mix, eta_cap, Grades::Full).remove(0);
    if !split.eta.is_zero() {
        xi = xi.mul_capped(&split.eta.exp_series_capped(eta_cap)?, eta_cap);
    }
    Ok(xi.scale(split.scalar.exp()))
}

/// Direct computation of `log ∫dμ_I exp(f)`: exponentiate, integrate, take the
/// nilpotent logarithm.
pub fn log_direct(f: &GrassmannElement) -> Result<LogSeries> {
    log_direct_capped(f, None)
}

pub fn log_direct_capped(f: &GrassmannElement, eta_cap: Option<u32>) -> Result<LogSeries> {
    let xi = gaussian_exp_integral(f, eta_cap)?;
    log_nilpotent(&xi, eta_cap)
}

/// Coefficient of the ordered pair `η(z₁) η(z₂)` in `log ∫dμ_I exp(f)`, i.e. the
/// left derivative in `z₁` and right derivative in `z₂` at zero source.
pub fn truncated_two_point_direct(
    universe: &Universe,
    f: &GrassmannElement,
    z1: GeneratorIndex,
    z2: GeneratorIndex,
) -> Result<Complex64> {
    let log = log_direct_capped(f, Some(2))?;
    log.coefficient_of(universe, &[z1, z2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn uni() -> Universe {
        Universe::new(Lattice::cubic(2, 2), 2, 1).unwrap()
    }

    #[test]
    fn monomial_integrals() {
        let u = uni();
        assert_eq!(integrate_monomial(Monomial::ONE).unwrap(), c(1.0));
        let p = u.bit(&GeneratorIndex::psi(2, 1, 0, false)).unwrap();
        let pb = u.bit(&GeneratorIndex::psi(2, 1, 0, true)).unwrap();
        assert_eq!(integrate_monomial(Monomial(1 << p | 1 << pb)).unwrap(), c(1.0));
        assert_eq!(integrate_monomial(Monomial(1 << p)).unwrap(), c(0.0));
        let eta = u.bit(&GeneratorIndex::eta(0, 0, 0, false)).unwrap();
        assert!(integrate_monomial(Monomial(1u128 << eta)).is_err());
    }

    #[test]
    fn barred_first_pair_integrates_to_minus_one() {
        let u = uni();
        let pb = GeneratorIndex::psi(0, 0, 0, true);
        let p = GeneratorIndex::psi(0, 0, 0, false);
        let e = GrassmannElement::product_of(&u, &[pb, p], c(1.0)).unwrap();
        assert_eq!(integrate_element(&e).scalar_part(), c(-1.0));
    }

    #[test]
    fn spectators_pass_through() {
        let u = uni();
        let f = GrassmannElement::product_of(
            &u,
            &[
                GeneratorIndex::psi(1, 0, 0, false),
                GeneratorIndex::psi(1, 0, 0, true),
                GeneratorIndex::eta(0, 1, 0, false),
                GeneratorIndex::eta(3, 0, 0, true),
            ],
            c(3.0),
        )
        .unwrap();
        let expect = GrassmannElement::product_of(
            &u,
            &[GeneratorIndex::eta(0, 1, 0, false), GeneratorIndex::eta(3, 0, 0, true)],
            c(3.0),
        )
        .unwrap();
        assert_eq!(integrate_element(&f), expect);
        assert_eq!(integrate_element(&GrassmannElement::one()), GrassmannElement::one());
    }

    #[test]
    fn pairing_determinant_cases() {
        assert_eq!(pairing_determinant(&[(0, 0, 0)], &[(0, 0, 0)]).unwrap(), 1.0);
        assert_eq!(pairing_determinant(&[(0, 0, 0), (1, 0, 0)], &[(1, 0, 0), (0, 0, 0)]).unwrap(), -1.0);
        assert_eq!(pairing_determinant(&[(0, 0, 0)], &[(1, 0, 0)]).unwrap(), 0.0);
        assert!(pairing_determinant(&[(0, 0, 0)], &[]).is_err());
    }

    #[test]
    fn log_of_zero_exponent_is_zero() {
        let log = log_direct(&GrassmannElement::zero()).unwrap();
        assert!(log.element().is_zero());
    }

    #[test]
    fn singular_normalization_is_reported() {
        let u = uni();
        // ∫(1 - ψψ̄) = 0
        let f = GrassmannElement::product_of(
            &u,
            &[GeneratorIndex::psi(0, 0, 0, false), GeneratorIndex::psi(0, 0, 0, true)],
            c(-1.0),
        )
        .unwrap();
        assert_eq!(log_direct(&f), Err(Error::SingularNormalization));
    }

    #[test]
    fn integrate_product_matches_materialized_product() {
        let u = uni();
        let g = GrassmannElement::product_of(
            &u,
            &[GeneratorIndex::psi(0, 0, 0, false), GeneratorIndex::psi(0, 0, 0, true)],
            c(0.7),
        )
        .unwrap()
        .add(&GrassmannElement::one());
        let m = GrassmannElement::product_of(
            &u,
            &[GeneratorIndex::psi(0, 1, 0, true), GeneratorIndex::eta(1, 0, 0, false)],
            c(1.3),
        )
        .unwrap()
        .mul(
            &GrassmannElement::product_of(
                &u,
                &[GeneratorIndex::eta(0, 0, 0, true), GeneratorIndex::psi(0, 1, 0, false)],
                c(-0.4),
            )
            .unwrap()
            .add(&GrassmannElement::one()),
        );
        let direct = integrate_element(&g.mul(&m));
        let fast = integrate_product(&g, &m).unwrap();
        assert!(direct.approx_eq(&fast, 1e-14, 1e-15));
    }
}
