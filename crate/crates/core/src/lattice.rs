//! Periodic hypercubic lattices and torus metrics.

use serde::{Deserialize, Serialize};

/// Distance used on the torus. Both use the minimal periodic image per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    L1,
}

/// A finite periodic box `Z_L1 x ... x Z_Ld`. Sites are numbered
/// lexicographically with the first axis most significant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    dims: Vec<usize>,
}

/// Set of lattice sites as a bitmask; lattices are limited to 64 sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SiteSet(pub u64);

impl SiteSet {
    pub const EMPTY: SiteSet = SiteSet(0);

    pub fn single(site: usize) -> Self {
        SiteSet(1u64 << site)
    }

    pub fn from_sites<I: IntoIterator<Item = usize>>(sites: I) -> Self {
        SiteSet(sites.into_iter().fold(0, |m, s| m | (1u64 << s)))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, site: usize) -> bool {
        self.0 >> site & 1 == 1
    }

    pub fn intersects(self, other: SiteSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset_of(self, other: SiteSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: SiteSet) -> SiteSet {
        SiteSet(self.0 | other.0)
    }

    pub fn minus(self, other: SiteSet) -> SiteSet {
        SiteSet(self.0 & !other.0)
    }

    /// Lowest site in the set.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let s = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(s)
            }
        })
    }

    /// All subsets of `self` (including empty and `self`), in increasing mask order.
    pub fn subsets(self) -> impl Iterator<Item = SiteSet> {
        let full = self.0;
        let mut cur: Option<u64> = Some(0);
        std::iter::from_fn(move || {
            let c = cur?;
            cur = if c == full { None } else { Some(((c | !full).wrapping_add(1)) & full) };
            Some(SiteSet(c))
        })
    }
}

impl Lattice {
    pub fn new(dims: Vec<usize>) -> Self {
        assert!(!dims.is_empty() && dims.iter().all(|&l| l >= 1));
        Lattice { dims }
    }

    /// `d`-dimensional box with side `l` on every axis.
    pub fn cubic(d: usize, l: usize) -> Self {
        Self::new(vec![l; d])
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn volume(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn all_sites(&self) -> SiteSet {
        let v = self.volume();
        if v == 64 {
            SiteSet(u64::MAX)
        } else {
            SiteSet((1u64 << v) - 1)
        }
    }

    pub fn coords(&self, mut site: usize) -> Vec<usize> {
        let mut c = vec![0; self.dims.len()];
        for (axis, &l) in self.dims.iter().enumerate().rev() {
            c[axis] = site % l;
            site /= l;
        }
        c
    }

    pub fn site(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&c, &l)| acc * l + c % l)
    }

    /// Site displaced by `step` (may be negative) along `axis`, with periodic wrap.
    pub fn shift(&self, site: usize, axis: usize, step: isize) -> usize {
        let mut c = self.coords(site);
        let l = self.dims[axis] as isize;
        c[axis] = (c[axis] as isize + step).rem_euclid(l) as usize;
        self.site(&c)
    }

    /// Minimal-image per-axis offsets between two sites.
    pub fn offsets(&self, x: usize, y: usize) -> Vec<usize> {
        let (cx, cy) = (self.coords(x), self.coords(y));
        cx.iter()
            .zip(&cy)
            .zip(&self.dims)
            .map(|((&a, &b), &l)| {
                let d = a.abs_diff(b);
                d.min(l - d)
            })
            .collect()
    }

    pub fn distance(&self, x: usize, y: usize, metric: Metric) -> f64 {
        let off = self.offsets(x, y);
        match metric {
            Metric::Euclidean => off.iter().map(|&o| (o * o) as f64).sum::<f64>().sqrt(),
            Metric::L1 => off.iter().sum::<usize>() as f64,
        }
    }

    /// Largest pairwise distance inside a site set.
    pub fn diameter(&self, set: SiteSet, metric: Metric) -> f64 {
        let sites: Vec<usize> = set.iter().collect();
        let mut best: f64 = 0.0;
        for (i, &x) in sites.iter().enumerate() {
            for &y in &sites[i + 1..] {
                best = best.max(self.distance(x, y, metric));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coords_round_trip() {
        let lat = Lattice::new(vec![3, 4]);
        for s in 0..lat.volume() {
            assert_eq!(lat.site(&lat.coords(s)), s);
        }
        assert_eq!(lat.coords(5), vec![1, 1]);
    }

    #[test]
    fn torus_distance_uses_minimal_image() {
        let lat = Lattice::cubic(2, 4);
        let x = lat.site(&[0, 0]);
        let y = lat.site(&[3, 2]);
        assert_eq!(lat.offsets(x, y), vec![1, 2]);
        assert!((lat.distance(x, y, Metric::Euclidean) - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(lat.distance(x, y, Metric::L1), 3.0);
    }

    #[test]
    fn subsets_enumerates_power_set() {
        let s = SiteSet(0b1011);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|t| t.is_subset_of(s)));
        assert_eq!(subs[0], SiteSet::EMPTY);
        assert_eq!(*subs.last().unwrap(), s);
    }

    #[test]
    fn shift_wraps() {
        let lat = Lattice::cubic(2, 3);
        let x = lat.site(&[0, 2]);
        assert_eq!(lat.coords(lat.shift(x, 1, 1)), vec![0, 0]);
        assert_eq!(lat.coords(lat.shift(x, 0, -1)), vec![2, 2]);
    }
}
