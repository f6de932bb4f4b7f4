use fermionic_cluster::cluster::incidence_graph;
use fermionic_cluster::grassmann::{CoefficientSystem, GrassmannElement, Monomial, Universe};
use fermionic_cluster::lattice::{Lattice, Metric, SiteSet};
use fermionic_cluster::norms::{coeff_norm, kernel_norm, WeightSystem};
use fermionic_cluster::trees::{enumerate_trees, tree_subgraph_of};
use num_complex::Complex64;
use proptest::prelude::*;

fn element() -> impl Strategy<Value = GrassmannElement> {
    prop::collection::vec((0u128..1 << 6, -2.0..2.0f64), 0..6).prop_map(|terms| {
        // bits 0..3 psi, 64..67 eta
        GrassmannElement::from_terms(terms.into_iter().map(|(m, c)| (Monomial((m & 0b111) | (m >> 3) << 64), Complex64::new(c, 0.0))))
    })
}

fn generator(bit: u32) -> GrassmannElement {
    GrassmannElement::monomial(Monomial(1 << bit), Complex64::new(1.0, 0.0))
}

proptest! {
    #[test]
    fn product_is_associative(a in element(), b in element(), c in element()) {
        prop_assert!(a.mul(&b).mul(&c).approx_eq(&a.mul(&b.mul(&c)), 1e-12, 1e-12));
    }

    #[test]
    fn product_distributes(a in element(), b in element(), c in element()) {
        prop_assert!(a.mul(&b.add(&c)).approx_eq(&a.mul(&b).add(&a.mul(&c)), 1e-12, 1e-12));
    }

    #[test]
    fn generators_anticommute(i in prop::sample::select(vec![0u32, 1, 2, 64, 65, 66]), j in prop::sample::select(vec![0u32, 1, 2, 64, 65, 66])) {
        let (x, y) = (generator(i), generator(j));
        prop_assert!(x.mul(&y).add(&y.mul(&x)).is_zero());
    }

    #[test]
    fn even_elements_commute(a in element(), b in element()) {
        let even = |e: &GrassmannElement| GrassmannElement::from_terms(e.iter_all().filter(|(m, _)| m.degree() % 2 == 0));
        let (a, b) = (even(&a), even(&b));
        prop_assert!(a.mul(&b).approx_eq(&b.mul(&a), 1e-12, 1e-12));
    }

    #[test]
    fn norms_grow_with_weights(
        raw in prop::collection::vec((0u8..8, 0u8..8, 0u8..8, -1.0..1.0f64), 1..6),
        h1 in 0.5..4.0f64, dh in 0.0..2.0f64, kappa in 0.0..1.0f64, dk in 0.0..1.0f64,
    ) {
        let u = Universe::new(Lattice::cubic(2, 2), 1, 1).unwrap();
        let mut a = CoefficientSystem::new();
        for (p, q, e, c) in raw {
            a.add_raw(&[p, q], &[e], Complex64::new(c, 0.0));
        }
        let w = WeightSystem::new(kappa, h1, 1.0, Metric::Euclidean).unwrap();
        let wider = [
            WeightSystem::new(kappa, h1 + dh, 1.0, Metric::Euclidean).unwrap(),
            WeightSystem::new(kappa, h1, 1.0 + dh, Metric::Euclidean).unwrap(),
            WeightSystem::new(kappa + dk, h1, 1.0, Metric::Euclidean).unwrap(),
        ];
        for v in &wider {
            prop_assert!(kernel_norm(&u, &a, v) >= kernel_norm(&u, &a, &w) * (1.0 - 1e-12));
            prop_assert!(coeff_norm(&u, &a, v) >= coeff_norm(&u, &a, &w) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn tree_subgraph_matches_edge_lookup(raw in prop::collection::vec(1u64..16, 2..6), pick in 0usize..1000) {
        let supports: Vec<SiteSet> = raw.iter().map(|&m| SiteSet::from_sites((0..4).filter(|b| m >> b & 1 == 1))).collect();
        let graph = incidence_graph(&supports);
        let trees = enumerate_trees(supports.len()).unwrap();
        let tree = &trees[pick % trees.len()];
        let brute = tree.edges().iter().all(|&(i, j)| supports[i].intersects(supports[j]));
        prop_assert_eq!(tree_subgraph_of(tree, &graph).unwrap(), brute);
    }
}

#[test]
fn antisymmetrization_preserves_the_element() {
    let u = Universe::new(Lattice::cubic(2, 2), 1, 1).unwrap();
    let mut a = CoefficientSystem::new();
    a.add_raw(&[1, 2], &[0], Complex64::new(0.5, 0.0));
    a.add_raw(&[3, 0, 5], &[2, 7], Complex64::new(-0.25, 0.1));
    let anti = a.antisymmetrize().unwrap();
    assert!(anti.to_element().approx_eq(&a.to_element(), 1e-14, 1e-15));
    assert!(coeff_norm(&u, &a, &WeightSystem::new(0.5, 2.0, 1.0, Metric::Euclidean).unwrap()) > 0.0);
}
