use graphctl::families::{biorthogonal, biorthogonal_complex, gram, shift_defect, ChannelSet, FamilyKind, FamilySpec};
use graphctl::graph::{build_tree, DensityProfile, GraphSpec};
use graphctl::spectral::{solve_spectrum, MeshConfig, SpectralData};
use nalgebra::DMatrix;
use proptest::prelude::*;
use std::f64::consts::PI;

fn equal_star() -> SpectralData<f64> {
    solve_spectrum(&build_tree(GraphSpec::star(&[1.0; 3], &[1.0; 3])).unwrap(), &MeshConfig::uniform(300), 7).unwrap()
}

fn interval(k: usize) -> SpectralData<f64> {
    solve_spectrum(&build_tree(GraphSpec::interval(PI, DensityProfile::Constant(1.0))).unwrap(), &MeshConfig::uniform(500), k).unwrap()
}

fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gram_invariant_under_cluster_remixing(theta in 0.0f64..std::f64::consts::TAU, t in 1.5f64..3.0, reflect in any::<bool>()) {
        let s = equal_star();
        let mut q = rotation(theta);
        if reflect {
            q.column_mut(0).neg_mut();
        }
        let cluster = s.clusters().iter().find(|r| r.len() == 2).unwrap().clone();
        let r = s.remixed(cluster, &q);
        for kind in [FamilyKind::SinCos, FamilyKind::Parabolic, FamilyKind::Schrodinger] {
            for ch in [ChannelSet::Full, ChannelSet::AllBut(2)] {
                let ga = gram(&FamilySpec::from_spectral(kind, &s, ch, 7, t).unwrap());
                let gb = gram(&FamilySpec::from_spectral(kind, &r, ch, 7, t).unwrap());
                // Eigenvalues are only determined to a multiple of ε·σ_max.
                let sigma_max = ga.sigma_min() * ga.condition();
                let (a, b) = (ga.sigma_min(), gb.sigma_min());
                prop_assert!((a - b).abs() <= 1e-10 * sigma_max, "{kind:?} {ch:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn biorthogonal_defect_when_conditioned(k in 2usize..9, tau in 0.2f64..2.0, partial in any::<bool>()) {
        let s = interval(8);
        let ch = if partial { ChannelSet::AllBut(0) } else { ChannelSet::Full };
        let b = biorthogonal(&FamilySpec::from_spectral(FamilyKind::Parabolic, &s, ch, k, tau).unwrap()).unwrap();
        if b.condition < 1e12 {
            prop_assert!(b.defect <= 1e-8, "defect {} at condition {}", b.defect, b.condition);
        }
        let c = biorthogonal_complex(&FamilySpec::from_spectral(FamilyKind::Schrodinger, &s, ch, k, tau).unwrap());
        if c.condition < 1e12 {
            prop_assert!(c.defect <= 1e-8, "defect {} at condition {}", c.defect, c.condition);
        }
    }

    #[test]
    fn exponential_gram_is_shift_invariant(t_star in 0.3f64..3.0, k in 1usize..7) {
        let s = interval(6);
        for kind in [FamilyKind::ExpPlus, FamilyKind::ExpMinus, FamilyKind::ExpPm] {
            let fam = FamilySpec::from_spectral(kind, &s, ChannelSet::Full, k, 2.0 * t_star).unwrap();
            prop_assert!(shift_defect(&fam, t_star).unwrap() <= 1e-13);
        }
    }
}

#[test]
fn biorthogonal_norms_shrink_with_longer_horizon() {
    // A biorthogonal family on [0, τ] extended by zero stays biorthogonal on
    // [0, 2τ], so the minimal norms cannot grow.
    let s = interval(8);
    for tau in [0.25, 0.5, 1.0] {
        let a = biorthogonal(&FamilySpec::from_spectral(FamilyKind::Parabolic, &s, ChannelSet::Full, 8, tau).unwrap()).unwrap();
        let b = biorthogonal(&FamilySpec::from_spectral(FamilyKind::Parabolic, &s, ChannelSet::Full, 8, 2.0 * tau).unwrap()).unwrap();
        for (x, y) in a.norms.iter().zip(&b.norms) {
            assert!(*y <= x * (1.0 + 1e-9), "τ={tau}: {y} > {x}");
        }
    }
}

#[test]
fn short_horizon_parabolic_family_is_ill_conditioned() {
    let s = interval(20);
    let g = gram(&FamilySpec::from_spectral(FamilyKind::Parabolic, &s, ChannelSet::AllBut(0), 20, 0.1).unwrap());
    assert!(g.is_singular());
    let g = gram(&FamilySpec::from_spectral(FamilyKind::Parabolic, &s, ChannelSet::Full, 20, 0.1).unwrap());
    assert!(g.condition() > 1e9);
}

#[test]
fn sine_gram_is_identity_at_critical_time() {
    // On the interval, sin(k t) restricted to [0, π] are orthogonal with norm π/2.
    let s = interval(6);
    let fam = FamilySpec::from_spectral(FamilyKind::Sin, &s, ChannelSet::AllBut(0), 6, PI).unwrap();
    let g = gram(&fam);
    for j in 0..6 {
        for k in 0..6 {
            let want = if j == k { s.alpha()[(j, 1)].powi(2) * PI / 2.0 } else { 0.0 };
            assert!((g.entry(j, k).re - want).abs() < 1e-4, "({j}, {k})");
        }
    }
}
