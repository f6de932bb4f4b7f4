//! Labelled trees and the tree-indexed sums used in the norm bounds.

use std::collections::BTreeSet;

use crate::cluster::IncidenceGraph;
use crate::error::{Error, Result};

pub const MAX_ENUMERATED_VERTICES: usize = 8;
pub const MAX_SERIES_ORDER: usize = 150;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelledTree {
    vertex_count: usize,
    /// Edges `(i, j)` with `i < j`, sorted.
    edges: Vec<(usize, usize)>,
}

impl LabelledTree {
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let set: BTreeSet<(usize, usize)> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        let edges: Vec<_> = set.into_iter().collect();
        if vertex_count == 0 || edges.len() + 1 != vertex_count {
            return Err(Error::InvalidArgument("a tree on n vertices has n - 1 edges".into()));
        }
        let mut uf = petgraph::unionfind::UnionFind::<usize>::new(vertex_count);
        for &(a, b) in &edges {
            if a == b || b >= vertex_count || !uf.union(a, b) {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) breaks the tree property")));
            }
        }
        Ok(LabelledTree { vertex_count, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertex_count];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    fn from_prufer(seq: &[usize]) -> Self {
        let n = seq.len() + 2;
        let mut degree = vec![1usize; n];
        for &v in seq {
            degree[v] += 1;
        }
        let mut edges = Vec::with_capacity(n - 1);
        for &v in seq {
            let leaf = (0..n).find(|&u| degree[u] == 1).unwrap();
            edges.push((leaf.min(v), leaf.max(v)));
            degree[leaf] -= 1;
            degree[v] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
        edges.push((rest[0], rest[1]));
        edges.sort_unstable();
        LabelledTree { vertex_count: n, edges }
    }
}

/// All labelled trees on `n` vertices, in Prüfer order.
pub fn enumerate_trees(n: usize) -> Result<Vec<LabelledTree>> {
    if n == 0 || n > MAX_ENUMERATED_VERTICES {
        return Err(Error::Capacity(format!("tree enumeration supports 1..={MAX_ENUMERATED_VERTICES} vertices, got {n}")));
    }
    if n == 1 {
        return Ok(vec![LabelledTree { vertex_count: 1, edges: Vec::new() }]);
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    let mut out = Vec::with_capacity(total);
    let mut seq = vec![0usize; len];
    for code in 0..total {
        let mut c = code;
        for slot in seq.iter_mut().rev() {
            *slot = c % n;
            c /= n;
        }
        out.push(LabelledTree::from_prufer(&seq));
    }
    Ok(out)
}

/// Number of labelled trees with coordination numbers `d`: `(n-2)! / Π (dᵢ - 1)!`.
pub fn count_trees_with_degrees(degrees: &[usize]) -> Result<u128> {
    let n = degrees.len();
    if n == 0 || degrees.iter().any(|&d| d == 0 && n > 1) || degrees.iter().sum::<usize>() != 2 * (n - 1) {
        return Err(Error::InvalidArgument(format!("{degrees:?} is not a tree degree sequence")));
    }
    if n == 1 {
        return Ok(1);
    }
    // multinomial as a product of binomials
    let mut count: u128 = 1;
    let mut placed = 0u128;
    for &d in degrees {
        let k = (d - 1) as u128;
        for i in 1..=k {
            count = count * (placed + i) / i;
        }
        placed += k;
    }
    Ok(count)
}

pub fn tree_subgraph_of(tree: &LabelledTree, graph: &IncidenceGraph) -> Result<bool> {
    if tree.vertex_count != graph.vertex_count {
        return Err(Error::InvalidArgument(format!(
            "tree has {} vertices, graph has {}",
            tree.vertex_count, graph.vertex_count
        )));
    }
    Ok(tree.edges.iter().all(|e| graph.edges.contains(e)))
}

/// `Σ_T Π dᵢ!` over labelled trees on `n` vertices.
///
/// Grouping by degree sequence gives `(n-2)! Σ_{Σeᵢ = n-2} Π (eᵢ + 1)`.
pub fn tree_factorial_weight(n: usize) -> f64 {
    if n <= 1 {
        return 1.0;
    }
    let k = n - 2;
    // coefficients of (Σ (e+1) x^e)^n truncated at x^k
    let base: Vec<f64> = (0..=k).map(|e| (e + 1) as f64).collect();
    let mut poly = vec![0.0; k + 1];
    poly[0] = 1.0;
    for _ in 0..n {
        let mut next = vec![0.0; k + 1];
        for (i, &p) in poly.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (j, &b) in base.iter().enumerate().take(k + 1 - i) {
                next[i + j] += p * b;
            }
        }
        poly = next;
    }
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    factorial * poly[k]
}

/// `ε + Σ_{n=2}^{n_max} 1/(n-1)! Σ_T Π dᵢ! εⁿ`.
pub fn lemma2_partial_sum(eps: f64, n_max: usize) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.125) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1/8), got {eps}")));
    }
    if n_max == 0 || n_max > MAX_SERIES_ORDER {
        return Err(Error::Capacity(format!("series order must lie in 1..={MAX_SERIES_ORDER}, got {n_max}")));
    }
    let mut sum = eps;
    let mut inv_factorial = 1.0;
    for n in 2..=n_max {
        inv_factorial /= (n - 1) as f64;
        sum += inv_factorial * tree_factorial_weight(n) * eps.powi(n as i32);
    }
    Ok(sum)
}

/// Right-hand side `ε / (1 - 8ε)`.
pub fn lemma2_bound(eps: f64) -> f64 {
    eps / (1.0 - 8.0 * eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cayley_counts() {
        for (n, c) in [(1, 1), (2, 1), (3, 3), (4, 16), (5, 125), (6, 1296)] {
            let trees = enumerate_trees(n).unwrap();
            assert_eq!(trees.len(), c);
            let distinct: BTreeSet<_> = trees.iter().collect();
            assert_eq!(distinct.len(), c);
        }
        assert!(enumerate_trees(9).is_err());
        assert!(enumerate_trees(0).is_err());
    }

    #[test]
    fn degree_counts() {
        assert_eq!(count_trees_with_degrees(&[1, 1]).unwrap(), 1);
        assert_eq!(count_trees_with_degrees(&[1, 1, 1, 3]).unwrap(), 1);
        assert_eq!(count_trees_with_degrees(&[2, 2, 1, 1]).unwrap(), 2);
        assert!(count_trees_with_degrees(&[2, 2]).is_err());
        assert!(count_trees_with_degrees(&[0, 2, 2]).is_err());
    }

    #[test]
    fn degree_counts_match_enumeration() {
        for n in 2..=6 {
            let trees = enumerate_trees(n).unwrap();
            let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
            for t in &trees {
                let d = t.degrees();
                if seen.insert(d.clone()) {
                    let filtered = trees.iter().filter(|u| u.degrees() == d).count() as u128;
                    assert_eq!(count_trees_with_degrees(&d).unwrap(), filtered);
                }
            }
        }
    }

    #[test]
    fn factorial_weight_matches_enumeration() {
        for n in 1..=7 {
            let brute: f64 = enumerate_trees(n)
                .unwrap()
                .iter()
                .map(|t| t.degrees().iter().map(|&d| (1..=d).product::<usize>() as f64).product::<f64>())
                .sum();
            assert_eq!(tree_factorial_weight(n), brute, "n = {n}");
        }
    }

    #[test]
    fn partial_sums_below_bound() {
        for eps in [0.001, 0.05, 0.1, 0.12] {
            let mut prev = 0.0;
            for n in 1..=40 {
                let s = lemma2_partial_sum(eps, n).unwrap();
                assert!(s >= prev);
                assert!(s <= lemma2_bound(eps));
                prev = s;
            }
        }
        assert!(lemma2_partial_sum(0.125, 3).is_err());
        assert!(lemma2_partial_sum(0.0, 3).is_err());
    }

    #[test]
    fn subgraph_checks() {
        let path = LabelledTree::new(3, [(0, 1), (1, 2)]).unwrap();
        let complete = IncidenceGraph { vertex_count: 3, edges: [(0, 1), (0, 2), (1, 2)].into(), connected: true };
        assert!(tree_subgraph_of(&path, &complete).unwrap());
        let missing = IncidenceGraph { vertex_count: 3, edges: [(0, 1), (0, 2)].into(), connected: true };
        assert!(!tree_subgraph_of(&path, &missing).unwrap());
        let small = IncidenceGraph { vertex_count: 2, edges: [(0, 1)].into(), connected: true };
        assert!(tree_subgraph_of(&path, &small).is_err());
    }
}
