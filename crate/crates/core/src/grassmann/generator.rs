use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, SiteSet};

/// Integration variables (`Psi`) sort before spectator sources (`Eta`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Psi,
    Eta,
}

/// One Grassmann generator `(site, spinor, flavor, bar)` in a given family.
///
/// The derived ordering is the canonical generator order: family, then site
/// (lexicographic in lattice coordinates), spinor, flavor, and unbarred before
/// barred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneratorIndex {
    pub family: Family,
    pub site: usize,
    pub spinor: usize,
    pub flavor: usize,
    pub bar: bool,
}

impl GeneratorIndex {
    pub fn psi(site: usize, spinor: usize, flavor: usize, bar: bool) -> Self {
        GeneratorIndex { family: Family::Psi, site, spinor, flavor, bar }
    }

    pub fn eta(site: usize, spinor: usize, flavor: usize, bar: bool) -> Self {
        GeneratorIndex { family: Family::Eta, site, spinor, flavor, bar }
    }
}

/// Bit offset of the eta family inside a [`Monomial`] mask.
pub const ETA_OFFSET: u32 = 64;
const PSI_MASK: u128 = u64::MAX as u128;

/// The enumerated generator universe of a run: each family has
/// `sites * spinor_dim * flavors * 2` generators and must fit in 64 bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    lattice: Lattice,
    spinor_dim: usize,
    flavors: usize,
}

impl Universe {
    pub fn new(lattice: Lattice, spinor_dim: usize, flavors: usize) -> Result<Self> {
        if spinor_dim == 0 || flavors == 0 {
            return Err(Error::InvalidArgument("spinor_dim and flavors must be positive".into()));
        }
        let per_family = lattice.volume() * spinor_dim * flavors * 2;
        if per_family > 64 {
            return Err(Error::Capacity(format!(
                "{per_family} generators per family (sites {} x spinors {spinor_dim} x flavors {flavors} x 2); at most 64 supported",
                lattice.volume()
            )));
        }
        Ok(Universe { lattice, spinor_dim, flavors })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn spinor_dim(&self) -> usize {
        self.spinor_dim
    }

    pub fn flavors(&self) -> usize {
        self.flavors
    }

    /// Generators per family.
    pub fn family_size(&self) -> usize {
        self.lattice.volume() * self.spinor_dim * self.flavors * 2
    }

    /// Generators per family living on one site.
    pub fn per_site(&self) -> usize {
        self.spinor_dim * self.flavors * 2
    }

    /// Bit index of a generator within its family.
    pub fn family_bit(&self, g: &GeneratorIndex) -> Result<u8> {
        if g.site >= self.lattice.volume() || g.spinor >= self.spinor_dim || g.flavor >= self.flavors {
            return Err(Error::OutOfUniverse(format!("{g:?}")));
        }
        let b = ((g.site * self.spinor_dim + g.spinor) * self.flavors + g.flavor) * 2 + g.bar as usize;
        Ok(b as u8)
    }

    /// Bit index inside the 128-bit monomial mask.
    pub fn bit(&self, g: &GeneratorIndex) -> Result<u32> {
        let b = self.family_bit(g)? as u32;
        Ok(match g.family {
            Family::Psi => b,
            Family::Eta => b + ETA_OFFSET,
        })
    }

    pub fn generator(&self, bit: u32) -> GeneratorIndex {
        let (family, b) = if bit >= ETA_OFFSET {
            (Family::Eta, (bit - ETA_OFFSET) as usize)
        } else {
            (Family::Psi, bit as usize)
        };
        let bar = b % 2 == 1;
        let rest = b / 2;
        let flavor = rest % self.flavors;
        let rest = rest / self.flavors;
        GeneratorIndex { family, site: rest / self.spinor_dim, spinor: rest % self.spinor_dim, flavor, bar }
    }

    pub fn site_of_bit(&self, bit: u32) -> usize {
        let b = if bit >= ETA_OFFSET { bit - ETA_OFFSET } else { bit } as usize;
        b / self.per_site()
    }

    /// Sites touched by a monomial (both families).
    pub fn support(&self, m: Monomial) -> SiteSet {
        SiteSet::from_sites(m.bits().map(|b| self.site_of_bit(b)))
    }

    /// Sites touched by the psi part of a monomial.
    pub fn psi_support(&self, m: Monomial) -> SiteSet {
        self.support(m.psi_part())
    }

    /// Mask of all psi generators on the given sites.
    pub fn psi_mask_of(&self, sites: SiteSet) -> u128 {
        let per = self.per_site();
        let block: u128 = if per == 128 { u128::MAX } else { (1u128 << per) - 1 };
        sites.iter().fold(0u128, |m, s| m | block << (s * per))
    }
}

/// A canonical monomial: a set of generators stored as a bitmask, low 64
/// bits psi, high 64 bits eta. Bit order is the canonical generator order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub u128);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn degree(self) -> u32 {
        self.0.count_ones()
    }

    pub fn psi_part(self) -> Monomial {
        Monomial(self.0 & PSI_MASK)
    }

    pub fn eta_part(self) -> Monomial {
        Monomial(self.0 & !PSI_MASK)
    }

    pub fn psi_degree(self) -> u32 {
        (self.0 & PSI_MASK).count_ones()
    }

    pub fn eta_degree(self) -> u32 {
        (self.0 >> ETA_OFFSET).count_ones()
    }

    pub fn is_one(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> impl Iterator<Item = u32> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let b = m.trailing_zeros();
                m &= m - 1;
                Some(b)
            }
        })
    }

    pub fn generators(self, universe: &Universe) -> Vec<GeneratorIndex> {
        self.bits().map(|b| universe.generator(b)).collect()
    }
}

/// Sign of `m(a) * m(b)` relative to the canonical monomial `m(a | b)`,
/// or 0 when the two share a generator.
#[inline]
pub fn merge_sign(a: u128, b: u128) -> i32 {
    if a & b != 0 {
        return 0;
    }
    let mut parity = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        parity ^= a.checked_shr(j + 1).unwrap_or(0).count_ones() & 1;
    }
    if parity == 0 {
        1
    } else {
        -1
    }
}

/// Bring an ordered product of generator bits to canonical order.
/// Returns the permutation sign, or 0 with the unit monomial if a generator repeats.
pub fn canonicalize_bits(bits: &[u32]) -> (i32, Monomial) {
    let mut mask = 0u128;
    let mut sign = 1;
    for &b in bits {
        let s = merge_sign(mask, 1u128 << b);
        if s == 0 {
            return (0, Monomial::ONE);
        }
        sign *= s;
        mask |= 1u128 << b;
    }
    (sign, Monomial(mask))
}

/// Canonical form of an ordered product of generators.
pub fn canonicalize(universe: &Universe, generators: &[GeneratorIndex]) -> Result<(i32, Monomial)> {
    let bits = generators.iter().map(|g| universe.bit(g)).collect::<Result<Vec<_>>>()?;
    Ok(canonicalize_bits(&bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni() -> Universe {
        Universe::new(Lattice::cubic(2, 2), 2, 1).unwrap()
    }

    #[test]
    fn canonical_order_matches_bit_order() {
        let u = uni();
        let mut gens = Vec::new();
        for fam in [Family::Psi, Family::Eta] {
            for site in 0..4 {
                for spinor in 0..2 {
                    for bar in [false, true] {
                        gens.push(GeneratorIndex { family: fam, site, spinor, flavor: 0, bar });
                    }
                }
            }
        }
        let mut sorted = gens.clone();
        sorted.sort();
        assert_eq!(gens, sorted);
        let bits: Vec<u32> = gens.iter().map(|g| u.bit(g).unwrap()).collect();
        assert!(bits.windows(2).all(|w| w[0] < w[1]));
        for (g, b) in gens.iter().zip(&bits) {
            assert_eq!(u.generator(*b), *g);
        }
    }

    #[test]
    fn canonicalize_examples() {
        let u = uni();
        let x1 = GeneratorIndex::psi(0, 0, 0, false);
        let x2 = GeneratorIndex::psi(1, 0, 0, true);
        let (s, m) = canonicalize(&u, &[x1, x2]).unwrap();
        assert_eq!(s, 1);
        assert_eq!(m.degree(), 2);
        let (s2, m2) = canonicalize(&u, &[x2, x1]).unwrap();
        assert_eq!((s2, m2), (-1, m));
        assert_eq!(canonicalize(&u, &[x1, x1]).unwrap(), (0, Monomial::ONE));
    }

    #[test]
    fn out_of_box_generator_rejected() {
        let u = uni();
        assert!(u.bit(&GeneratorIndex::psi(4, 0, 0, false)).is_err());
        assert!(u.bit(&GeneratorIndex::psi(0, 2, 0, false)).is_err());
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(Universe::new(Lattice::cubic(2, 4), 2, 1).is_ok());
        assert!(matches!(Universe::new(Lattice::cubic(2, 4), 2, 2), Err(Error::Capacity(_))));
    }

    #[test]
    fn merge_sign_counts_inversions() {
        assert_eq!(merge_sign(0b1, 0b10), 1);
        assert_eq!(merge_sign(0b10, 0b1), -1);
        assert_eq!(merge_sign(0b110, 0b1), 1);
        assert_eq!(merge_sign(0b11, 0b1), 0);
        assert_eq!(merge_sign(1u128 << 127, 1), -1);
    }

    #[test]
    fn psi_mask_of_sites() {
        let u = uni();
        let m = u.psi_mask_of(SiteSet::from_sites([1]));
        assert_eq!(m, 0b1111_0000);
        assert_eq!(u.psi_support(Monomial(m)), SiteSet::single(1));
    }
}
