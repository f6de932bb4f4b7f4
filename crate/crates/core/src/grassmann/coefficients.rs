use std::collections::BTreeMap;

use num_complex::Complex64;

use super::element::GrassmannElement;
use super::generator::{canonicalize_bits, Family, GeneratorIndex, Monomial, Universe, ETA_OFFSET};
use crate::error::{Error, Result};
use crate::lattice::SiteSet;

/// An ordered list of generators, the argument of a kernel slot block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexVector {
    pub components: Vec<GeneratorIndex>,
}

impl IndexVector {
    pub fn new(components: Vec<GeneratorIndex>) -> Self {
        IndexVector { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Distinct sites of the components; spinor, flavor and bar are ignored.
    pub fn support(&self) -> SiteSet {
        SiteSet::from_sites(self.components.iter().map(|g| g.site))
    }

    /// `u ∘ v`: the components of `u` followed by those of `v`.
    pub fn concat(&self, other: &IndexVector) -> IndexVector {
        let mut components = self.components.clone();
        components.extend_from_slice(&other.components);
        IndexVector { components }
    }
}

/// Componentwise concatenation of two equally long tuples of vectors.
pub fn concat_tuples(u: &[IndexVector], v: &[IndexVector]) -> Result<Vec<IndexVector>> {
    if u.len() != v.len() {
        return Err(Error::InvalidArgument(format!("tuple lengths differ: {} vs {}", u.len(), v.len())));
    }
    Ok(u.iter().zip(v).map(|(a, b)| a.concat(b)).collect())
}

/// Key of one kernel entry: ordered psi family bits, then ordered eta family bits.
pub type EntryKey = (Vec<u8>, Vec<u8>);

/// A kernel `a(ξ⃗, z⃗)` representing `Σ a(ξ⃗, z⃗) ψ(ξ⃗) η(z⃗)`.
///
/// Entries are raw: neither symmetric nor antisymmetric in general. Duplicate
/// keys accumulate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientSystem {
    entries: BTreeMap<EntryKey, Complex64>,
    not_antisymmetric: bool,
}

impl CoefficientSystem {
    pub fn new() -> Self {
        CoefficientSystem { entries: BTreeMap::new(), not_antisymmetric: true }
    }

    /// False only for systems produced by [`CoefficientSystem::antisymmetrize`].
    pub fn not_antisymmetric(&self) -> bool {
        self.not_antisymmetric
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&EntryKey, Complex64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn get(&self, psi: &[u8], eta: &[u8]) -> Complex64 {
        self.entries.get(&(psi.to_vec(), eta.to_vec())).copied().unwrap_or_default()
    }

    /// Adds `c` to the entry at family-bit indices `(psi, eta)`.
    pub fn add_raw(&mut self, psi: &[u8], eta: &[u8], c: Complex64) {
        if c == Complex64::default() {
            return;
        }
        let key = (psi.to_vec(), eta.to_vec());
        let slot = self.entries.entry(key.clone()).or_default();
        *slot += c;
        if *slot == Complex64::default() {
            self.entries.remove(&key);
        }
        self.not_antisymmetric = true;
    }

    /// Adds `c` at `(ξ⃗, z⃗)`, validating the families of both vectors.
    pub fn add(&mut self, universe: &Universe, xi: &IndexVector, z: &IndexVector, c: Complex64) -> Result<()> {
        let psi = family_bits(universe, xi, Family::Psi)?;
        let eta = family_bits(universe, z, Family::Eta)?;
        self.add_raw(&psi, &eta, c);
        Ok(())
    }

    pub fn index_vectors(&self, universe: &Universe, key: &EntryKey) -> (IndexVector, IndexVector) {
        let xi = key.0.iter().map(|&b| universe.generator(b as u32)).collect();
        let z = key.1.iter().map(|&b| universe.generator(b as u32 + ETA_OFFSET)).collect();
        (IndexVector::new(xi), IndexVector::new(z))
    }

    /// Sites of all slots of an entry.
    pub fn entry_support(universe: &Universe, key: &EntryKey) -> SiteSet {
        let per = universe.per_site();
        SiteSet::from_sites(key.0.iter().chain(&key.1).map(|&b| b as usize / per))
    }

    /// Sites of the psi slots of an entry.
    pub fn psi_support(universe: &Universe, key: &EntryKey) -> SiteSet {
        let per = universe.per_site();
        SiteSet::from_sites(key.0.iter().map(|&b| b as usize / per))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = CoefficientSystem { entries: BTreeMap::new(), not_antisymmetric: self.not_antisymmetric };
        if c != Complex64::default() {
            out.entries = self.entries.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        }
        out
    }

    pub fn merge(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in other.entries() {
            out.add_raw(&k.0, &k.1, v);
        }
        out
    }

    /// Entries whose key satisfies `keep`.
    pub fn filter<F: Fn(&EntryKey) -> bool>(&self, keep: F) -> Self {
        CoefficientSystem {
            entries: self.entries.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.clone(), *v)).collect(),
            not_antisymmetric: self.not_antisymmetric,
        }
    }

    /// Signed average over permutations of the psi slots and of the eta slots.
    /// The result represents the same Grassmann element.
    pub fn antisymmetrize(&self) -> Result<Self> {
        let mut out = BTreeMap::<EntryKey, Complex64>::new();
        for ((psi, eta), c) in self.entries() {
            if psi.len() > 8 || eta.len() > 8 {
                return Err(Error::Capacity("antisymmetrization limited to 8 slots per family".into()));
            }
            let perms_psi = signed_permutations(psi.len());
            let perms_eta = signed_permutations(eta.len());
            let norm = (perms_psi.len() * perms_eta.len()) as f64;
            for (pp, sp) in &perms_psi {
                let kp: Vec<u8> = pp.iter().map(|&i| psi[i]).collect();
                for (pe, se) in &perms_eta {
                    let ke: Vec<u8> = pe.iter().map(|&i| eta[i]).collect();
                    *out.entry((kp.clone(), ke)).or_default() += c * (sp * se) as f64 / norm;
                }
            }
        }
        out.retain(|_, v| v.norm() > 0.0);
        Ok(CoefficientSystem { entries: out, not_antisymmetric: false })
    }

    /// The Grassmann element `Σ a(ξ⃗, z⃗) ψ(ξ⃗) η(z⃗)` in canonical form.
    pub fn to_element(&self) -> GrassmannElement {
        let mut e = GrassmannElement::zero();
        for ((psi, eta), c) in self.entries() {
            let bits: Vec<u32> =
                psi.iter().map(|&b| b as u32).chain(eta.iter().map(|&b| b as u32 + ETA_OFFSET)).collect();
            let (s, m) = canonicalize_bits(&bits);
            if s != 0 {
                e.add_term(m, c * s as f64);
            }
        }
        e
    }

    /// One entry per canonical monomial (psi bits ascending, then eta bits ascending).
    pub fn from_element(e: &GrassmannElement) -> Self {
        let mut out = CoefficientSystem::new();
        for (m, c) in e.iter_all() {
            let (psi, eta) = monomial_key(m);
            out.add_raw(&psi, &eta, c);
        }
        out
    }
}

/// The canonical entry key of a monomial.
pub fn monomial_key(m: Monomial) -> EntryKey {
    let psi = m.psi_part().bits().map(|b| b as u8).collect();
    let eta = m.eta_part().bits().map(|b| (b - ETA_OFFSET) as u8).collect();
    (psi, eta)
}

fn family_bits(universe: &Universe, v: &IndexVector, family: Family) -> Result<Vec<u8>> {
    v.components
        .iter()
        .map(|g| {
            if g.family != family {
                Err(Error::InvalidArgument(format!("{g:?} is not in the {family:?} family")))
            } else {
                universe.family_bit(g)
            }
        })
        .collect()
}

/// All permutations of `0..n` with their signs.
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, i32)> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut current, &mut out);
    out.into_iter()
        .map(|p| {
            let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            (p, if inversions % 2 == 0 { 1 } else { -1 })
        })
        .collect()
}

fn heap_permute(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..k - 1 {
        heap_permute(k - 1, a, out);
        if k % 2 == 0 {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
    heap_permute(k - 1, a, out);
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
    fn permutation_signs_match_inversion_parity() {
        for n in 0..6 {
            let perms = signed_permutations(n);
            assert_eq!(perms.len(), (1..=n).product::<usize>().max(1));
            for (p, s) in perms {
                let inv = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
                assert_eq!(s, if inv % 2 == 0 { 1 } else { -1 });
            }
        }
    }

    #[test]
    fn concat_examples() {
        let x1 = GeneratorIndex::psi(0, 0, 0, false);
        let z1 = GeneratorIndex::eta(1, 0, 0, true);
        let u = IndexVector::new(vec![x1]);
        let v = IndexVector::new(vec![z1]);
        assert_eq!(u.concat(&v).components, vec![x1, z1]);
        assert_eq!(IndexVector::default().concat(&u), u);
        let t = concat_tuples(&[u.clone(), v.clone()], &[v.clone(), u.clone()]).unwrap();
        assert_eq!(t, vec![u.concat(&v), v.concat(&u)]);
        assert!(concat_tuples(&[u], &[]).is_err());
    }

    #[test]
    fn symmetric_kernel_antisymmetrizes_to_zero() {
        let u = uni();
        let x1 = GeneratorIndex::psi(0, 0, 0, false);
        let x2 = GeneratorIndex::psi(1, 0, 0, true);
        let mut a = CoefficientSystem::new();
        a.add(&u, &IndexVector::new(vec![x1, x2]), &IndexVector::default(), c(1.5)).unwrap();
        a.add(&u, &IndexVector::new(vec![x2, x1]), &IndexVector::default(), c(1.5)).unwrap();
        assert!(a.antisymmetrize().unwrap().is_empty());
        assert!(a.to_element().is_zero());
    }

    #[test]
    fn antisymmetric_input_is_fixed_point() {
        let u = uni();
        let x1 = GeneratorIndex::psi(0, 0, 0, false);
        let x2 = GeneratorIndex::psi(1, 0, 0, true);
        let mut a = CoefficientSystem::new();
        a.add(&u, &IndexVector::new(vec![x1, x2]), &IndexVector::default(), c(0.5)).unwrap();
        a.add(&u, &IndexVector::new(vec![x2, x1]), &IndexVector::default(), c(-0.5)).unwrap();
        let anti = a.antisymmetrize().unwrap();
        assert!(!anti.not_antisymmetric());
        for (k, v) in a.entries() {
            assert!((anti.get(&k.0, &k.1) - v).norm() < 1e-15);
        }
        assert_eq!(anti.len(), a.len());
    }

    #[test]
    fn family_mismatch_rejected() {
        let u = uni();
        let x1 = GeneratorIndex::psi(0, 0, 0, false);
        let mut a = CoefficientSystem::new();
        assert!(a.add(&u, &IndexVector::default(), &IndexVector::new(vec![x1]), c(1.0)).is_err());
    }

    #[test]
    fn empty_system_is_zero_element() {
        assert!(CoefficientSystem::new().to_element().is_zero());
    }

    #[test]
    fn from_element_round_trips() {
        let u = uni();
        let x1 = GeneratorIndex::psi(0, 0, 0, false);
        let z1 = GeneratorIndex::eta(1, 1, 0, true);
        let e = GrassmannElement::product_of(&u, &[z1, x1], c(2.0)).unwrap();
        assert_eq!(CoefficientSystem::from_element(&e).to_element(), e);
    }
}
