use std::collections::BTreeMap;

use num_complex::Complex64;
use rustc_hash::FxHashMap;

use super::generator::{canonicalize, merge_sign, GeneratorIndex, Monomial, Universe};
use crate::error::{Error, Result};

/// An element of the finite Grassmann algebra: a scalar part plus a sparse map
/// from canonical non-unit monomials to complex coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GrassmannElement {
    scalar: Complex64,
    terms: BTreeMap<Monomial, Complex64>,
}

impl GrassmannElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(Complex64::new(1.0, 0.0))
    }

    pub fn scalar(c: Complex64) -> Self {
        GrassmannElement { scalar: c, terms: BTreeMap::new() }
    }

    pub fn monomial(m: Monomial, c: Complex64) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    /// `c * g_1 ... g_k` for an ordered generator list.
    pub fn product_of(universe: &Universe, generators: &[GeneratorIndex], c: Complex64) -> Result<Self> {
        let (sign, m) = canonicalize(universe, generators)?;
        if sign == 0 {
            return Ok(Self::zero());
        }
        Ok(Self::monomial(m, c * sign as f64))
    }

    pub fn generator(universe: &Universe, g: GeneratorIndex) -> Result<Self> {
        Self::product_of(universe, &[g], Complex64::new(1.0, 0.0))
    }

    /// Collects `(monomial, coefficient)` pairs, summing duplicates.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Complex64)>>(terms: I) -> Self {
        let mut e = Self::zero();
        for (m, c) in terms {
            e.add_term(m, c);
        }
        e
    }

    pub fn scalar_part(&self) -> Complex64 {
        self.scalar
    }

    pub fn set_scalar(&mut self, c: Complex64) {
        self.scalar = c;
    }

    /// Non-unit terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, Complex64)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, *c))
    }

    /// All terms, the scalar first (when nonzero).
    pub fn iter_all(&self) -> impl Iterator<Item = (Monomial, Complex64)> + '_ {
        let s = (self.scalar != Complex64::default()).then_some((Monomial::ONE, self.scalar));
        s.into_iter().chain(self.terms())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.scalar == Complex64::default() && self.terms.is_empty()
    }

    pub fn coefficient(&self, m: Monomial) -> Complex64 {
        if m.is_one() {
            self.scalar
        } else {
            self.terms.get(&m).copied().unwrap_or_default()
        }
    }

    /// Coefficient of an ordered generator product, i.e. the value `c` such
    /// that the element contains `c * g_1 ... g_k`.
    pub fn coefficient_of(&self, universe: &Universe, generators: &[GeneratorIndex]) -> Result<Complex64> {
        let (sign, m) = canonicalize(universe, generators)?;
        Ok(if sign == 0 { Complex64::default() } else { self.coefficient(m) * sign as f64 })
    }

    pub fn add_term(&mut self, m: Monomial, c: Complex64) {
        if m.is_one() {
            self.scalar += c;
            return;
        }
        if c == Complex64::default() {
            return;
        }
        let slot = self.terms.entry(m).or_default();
        *slot += c;
        if *slot == Complex64::default() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        self.scalar += other.scalar;
        for (m, c) in other.terms() {
            self.add_term(m, c);
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == Complex64::default() {
            return Self::zero();
        }
        GrassmannElement {
            scalar: self.scalar * c,
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_capped(other, None)
    }

    /// Product in the quotient that discards monomials with more than
    /// `eta_cap` eta generators. `None` is the exact product.
    pub fn mul_capped(&self, other: &Self, eta_cap: Option<u32>) -> Self {
        let mut acc: FxHashMap<u128, Complex64> = FxHashMap::default();
        for (ma, ca) in self.iter_all() {
            let ea = ma.eta_degree();
            for (mb, cb) in other.iter_all() {
                if let Some(cap) = eta_cap {
                    if ea + mb.eta_degree() > cap {
                        continue;
                    }
                }
                let s = merge_sign(ma.0, mb.0);
                if s != 0 {
                    *acc.entry(ma.0 | mb.0).or_default() += ca * cb * s as f64;
                }
            }
        }
        Self::from_hash(acc)
    }

    pub(crate) fn from_hash(acc: FxHashMap<u128, Complex64>) -> Self {
        let mut out = Self::zero();
        for (m, c) in acc {
            if m == 0 {
                out.scalar += c;
            } else if c != Complex64::default() {
                out.terms.insert(Monomial(m), c);
            }
        }
        out
    }

    /// Drop every monomial with more than `cap` eta generators.
    pub fn truncate_eta(&self, cap: u32) -> Self {
        GrassmannElement {
            scalar: self.scalar,
            terms: self.terms.iter().filter(|(m, _)| m.eta_degree() <= cap).map(|(m, c)| (*m, *c)).collect(),
        }
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// True when every term has even total degree.
    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.degree() % 2 == 0)
    }

    /// True when the element contains psi generators only.
    pub fn is_psi_only(&self) -> bool {
        self.terms.keys().all(|m| m.eta_degree() == 0)
    }

    pub fn is_eta_only(&self) -> bool {
        self.terms.keys().all(|m| m.psi_degree() == 0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = (self.scalar - other.scalar).norm();
        for (m, c) in self.terms() {
            worst = worst.max((c - other.coefficient(m)).norm());
        }
        for (m, c) in other.terms() {
            if !self.terms.contains_key(&m) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    /// Coefficientwise comparison with a relative tolerance and an absolute floor.
    pub fn approx_eq(&self, other: &Self, rel: f64, abs_floor: f64) -> bool {
        let close = |a: Complex64, b: Complex64| (a - b).norm() <= abs_floor.max(rel * a.norm().max(b.norm()));
        close(self.scalar, other.scalar)
            && self.terms().all(|(m, c)| close(c, other.coefficient(m)))
            && other.terms().all(|(m, c)| close(c, self.coefficient(m)))
    }

    /// `exp(f)`. Requires a zero scalar part; scalars are carried as separate factors.
    ///
    /// For even `f` the terms commute and square to zero, so the exponential is the
    /// finite product of `(1 + t)` over terms. Otherwise the power series is summed
    /// until it terminates by nilpotency.
    pub fn exp_series(&self) -> Result<Self> {
        self.exp_series_capped(None)
    }

    pub fn exp_series_capped(&self, eta_cap: Option<u32>) -> Result<Self> {
        if self.scalar != Complex64::default() {
            return Err(Error::ConstantTerm);
        }
        if !self.is_even() {
            return self.exp_power_series(eta_cap);
        }
        let mut acc: FxHashMap<u128, Complex64> = FxHashMap::default();
        acc.insert(0, Complex64::new(1.0, 0.0));
        for (t, ct) in self.terms() {
            if eta_cap.is_some_and(|cap| t.eta_degree() > cap) {
                continue;
            }
            let mut next = acc.clone();
            for (&m, &c) in &acc {
                if m & t.0 != 0 || eta_cap.is_some_and(|cap| Monomial(m).eta_degree() + t.eta_degree() > cap) {
                    continue;
                }
                // even t commutes with everything, so t*m == m*t
                let s = merge_sign(m, t.0);
                *next.entry(m | t.0).or_default() += c * ct * s as f64;
            }
            acc = next;
        }
        Ok(Self::from_hash(acc))
    }

    /// `sum_l f^l / l!`, summed until `f^l` vanishes.
    pub fn exp_power_series(&self, eta_cap: Option<u32>) -> Result<Self> {
        if self.scalar != Complex64::default() {
            return Err(Error::ConstantTerm);
        }
        let mut out = Self::one();
        let mut power = Self::one();
        let mut l = 0u32;
        loop {
            l += 1;
            power = power.mul_capped(self, eta_cap).scale(Complex64::new(1.0 / l as f64, 0.0));
            if power.is_zero() {
                break;
            }
            out.add_assign(&power);
        }
        Ok(out)
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    /// Split into the part with psi generators and the rest.
    pub fn split_psi(&self) -> (Self, Self) {
        let mut with_psi = Self::zero();
        let mut without = Self::scalar(self.scalar);
        for (m, c) in self.terms() {
            if m.psi_degree() > 0 {
                with_psi.add_term(m, c);
            } else {
                without.add_term(m, c);
            }
        }
        (with_psi, without)
    }
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
    fn unit_and_anticommutation() {
        let u = uni();
        let a = GrassmannElement::generator(&u, GeneratorIndex::psi(0, 0, 0, false)).unwrap();
        let b = GrassmannElement::generator(&u, GeneratorIndex::psi(1, 1, 0, true)).unwrap();
        assert_eq!(GrassmannElement::one().mul(&a), a);
        assert!(a.mul(&b).add(&b.mul(&a)).is_zero());
        assert!(a.mul(&a).is_zero());
    }

    #[test]
    fn bilinear_squares_to_zero() {
        let u = uni();
        let pb = GeneratorIndex::psi(0, 0, 0, true);
        let p = GeneratorIndex::psi(0, 0, 0, false);
        let q = GrassmannElement::product_of(&u, &[pb, p], c(1.0)).unwrap();
        assert!(q.mul(&q).is_zero());
        let e = q.exp_series().unwrap();
        assert_eq!(e, GrassmannElement::one().add(&q));
    }

    #[test]
    fn exp_of_zero_is_one() {
        assert_eq!(GrassmannElement::zero().exp_series().unwrap(), GrassmannElement::one());
    }

    #[test]
    fn exp_rejects_constant() {
        assert_eq!(GrassmannElement::one().exp_series(), Err(Error::ConstantTerm));
    }

    #[test]
    fn eta_cap_drops_high_degree() {
        let u = uni();
        let e1 = GrassmannElement::generator(&u, GeneratorIndex::eta(0, 0, 0, false)).unwrap();
        let e2 = GrassmannElement::generator(&u, GeneratorIndex::eta(1, 0, 0, false)).unwrap();
        assert!(e1.mul_capped(&e2, Some(1)).is_zero());
        assert_eq!(e1.mul_capped(&e2, Some(2)), e1.mul(&e2));
    }

    #[test]
    fn coefficient_of_ordered_product() {
        let u = uni();
        let g1 = GeneratorIndex::eta(0, 0, 0, true);
        let g2 = GeneratorIndex::eta(1, 0, 0, false);
        let e = GrassmannElement::product_of(&u, &[g1, g2], c(2.5)).unwrap();
        assert_eq!(e.coefficient_of(&u, &[g1, g2]).unwrap(), c(2.5));
        assert_eq!(e.coefficient_of(&u, &[g2, g1]).unwrap(), c(-2.5));
    }
}
