mod common;

use graphctl::graph::{build_tree, DensityProfile, EdgeSpec, GraphSpec};
use graphctl::spectral::{solve_spectrum, weyl_check, MeshConfig};
use proptest::prelude::*;
use std::f64::consts::PI;

fn weighted_star() -> graphctl::graph::MetricTree<f64> {
    build_tree(GraphSpec::star(&[1.0, 2.0, 3.0], &[1.0, 2.25, 4.0])).unwrap()
}

#[test]
fn weighted_star_matches_secular_equation() {
    let s = solve_spectrum(&weighted_star(), &MeshConfig::per_optical_length(200.0), 10).unwrap();
    let oracle = common::star_frequencies(&[1.0, 2.0, 3.0], &[1.0, 2.25, 4.0], 10);
    for (g, o) in s.frequencies().iter().zip(&oracle) {
        assert!((g - o).abs() <= 1e-6 * o, "{g} vs {o}");
    }
}

#[test]
fn orthonormality_and_dirichlet_trace() {
    let tree = weighted_star();
    let s = solve_spectrum(&tree, &MeshConfig::per_optical_length(100.0), 8).unwrap();
    assert!(s.orthonormality_defect() <= 1e-8);
    for e in 0..3 {
        let leaf = *s.layout().edge_nodes(e).last().unwrap();
        for k in 0..8 {
            assert_eq!(s.mode(k)[leaf], 0.0);
        }
    }
}

#[test]
fn kirchhoff_residual_small_and_shrinking() {
    let tree = build_tree(GraphSpec::star(&[1.0, 1.5, 2.0], &[1.0, 1.0, 2.0])).unwrap();
    let coarse = solve_spectrum(&tree, &MeshConfig::uniform(200), 6).unwrap().kirchhoff_residuals(&tree);
    let fine = solve_spectrum(&tree, &MeshConfig::uniform(400), 6).unwrap().kirchhoff_residuals(&tree);
    for (c, f) in coarse.iter().zip(&fine) {
        assert!(*c <= 1e-3, "{c}");
        // At least first order: halving h at least roughly halves the residual.
        assert!(*f <= 0.6 * c, "{f} vs {c}");
    }
}

#[test]
fn p1_eigenvalues_converge_at_second_order() {
    let tree = build_tree(GraphSpec::interval(PI, DensityProfile::Linear { p: 1.0, q: 0.3 })).unwrap();
    let lam = |n: usize| solve_spectrum(&tree, &MeshConfig::uniform(n).with_refinement(1), 4).unwrap().discrete_eigenvalues().to_vec();
    let (a, b, c) = (lam(100), lam(200), lam(400));
    for k in 0..4 {
        let ratio = (a[k] - b[k]) / (b[k] - c[k]);
        assert!((3.5..4.5).contains(&ratio), "mode {k}: ratio {ratio}");
    }
}

#[test]
fn weyl_counting_is_monotone() {
    let tree = weighted_star();
    let s = solve_spectrum(&tree, &MeshConfig::per_optical_length(100.0), 12).unwrap();
    let w = weyl_check(&s, &tree);
    assert!(w.nondecreasing);
    // Dirichlet trees deviate from the leading Weyl term by a bounded amount.
    assert!(w.max_deviation <= tree.vertex_count() as f64);
}

#[test]
fn degenerate_clusters_are_detected() {
    let s = solve_spectrum(&build_tree(GraphSpec::star(&[1.0; 4], &[1.0; 4])).unwrap(), &MeshConfig::uniform(200), 5).unwrap();
    let sizes: Vec<usize> = s.clusters().iter().map(|r| r.len()).collect();
    assert_eq!(sizes, vec![1, 3, 1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn density_scaling_rescales_eigenvalues(s in 0.5f64..3.0, q in 0.0f64..0.5) {
        let spec = GraphSpec::interval(PI, DensityProfile::Linear { p: 1.0, q });
        let a = solve_spectrum(&build_tree(spec.clone()).unwrap(), &MeshConfig::uniform(400), 5).unwrap();
        let b = solve_spectrum(&build_tree(spec.with_scaled_density(s * s)).unwrap(), &MeshConfig::uniform(400), 5).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            prop_assert!((y * s * s - x).abs() <= 1e-6 * x);
        }
    }

    #[test]
    fn random_trees_are_orthonormal(lengths in proptest::collection::vec(0.5f64..2.0, 4), parents in proptest::collection::vec(0usize..4, 4)) {
        let edges = (0..4)
            .map(|i| EdgeSpec { id: i, tail: parents[i].min(i), head: i + 1, length: lengths[i], density: DensityProfile::Constant(1.0 + i as f64 * 0.5) })
            .collect();
        let tree = build_tree(GraphSpec { vertices: (0..5).collect(), edges }).unwrap();
        let s = solve_spectrum(&tree, &MeshConfig::per_optical_length(60.0), 5).unwrap();
        prop_assert!(s.orthonormality_defect() <= 1e-8);
        for r in s.kirchhoff_residuals(&tree) {
            prop_assert!(r <= 1e-2);
        }
    }
}
