use graphctl::control::{BoundaryControl, Equation};
use graphctl::evolution::{heat_forward, wave_forward};
use graphctl::families::ChannelSet;
use graphctl::graph::{build_tree, DensityProfile, GraphSpec, MetricTree};
use graphctl::spectral::{solve_spectrum, wave_norm, MeshConfig, ModalState, SpectralData};
use graphctl::synthesis::{heat_null_control, moment_residual, schrodinger_control, wave_control, ControlProblem, SynthesisError};
use nalgebra::DMatrix;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn trees() -> &'static [(MetricTree<f64>, SpectralData<f64>, usize); 3] {
    static CELL: OnceLock<[(MetricTree<f64>, SpectralData<f64>, usize); 3]> = OnceLock::new();
    CELL.get_or_init(|| {
        let make = |spec: GraphSpec<f64>, excluded: usize| {
            let t = build_tree(spec).unwrap();
            let s = solve_spectrum(&t, &MeshConfig::per_optical_length(80.0), 10).unwrap();
            (t, s, excluded)
        };
        [
            make(GraphSpec::interval(PI, DensityProfile::Constant(1.0)), 0),
            make(GraphSpec::star(&[1.0; 3], &[1.0; 3]), 1),
            make(GraphSpec::star(&[1.0, 2.0, 3.0], &[1.0, 2.25, 4.0]), 2),
        ]
    })
}

fn synth(p: &ControlProblem<f64>) -> Result<BoundaryControl<f64>, SynthesisError> {
    match p.equation {
        Equation::Wave => wave_control(p),
        Equation::Heat => heat_null_control(p),
        Equation::Schrodinger => schrodinger_control(p),
    }
    .map(|(f, _)| f)
}

fn state(eq: Equation, a: Vec<f64>, b: Vec<f64>) -> ModalState<f64> {
    if eq == Equation::Wave {
        ModalState::with_velocity(a, b)
    } else {
        ModalState::new(a)
    }
}

fn equation() -> impl Strategy<Value = Equation> {
    prop_oneof![Just(Equation::Wave), Just(Equation::Heat), Just(Equation::Schrodinger)]
}

fn horizon(eq: Equation, tree: &MetricTree<f64>, scale: f64) -> f64 {
    match eq {
        Equation::Wave => 2.0 * tree.optical_diameter().value * scale,
        _ => 0.5 * scale,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn moments_are_exact_when_conditioned(
        which in 0usize..3,
        eq in equation(),
        k in 2usize..9,
        partial in any::<bool>(),
        scale in 0.6f64..1.5,
        a in proptest::collection::vec(-1.0f64..1.0, 8),
        b in proptest::collection::vec(-1.0f64..1.0, 8),
    ) {
        let (tree, s, ex) = &trees()[which];
        let ch = if partial { ChannelSet::AllBut(*ex) } else { ChannelSet::Full };
        let p = ControlProblem::new(eq, s, ch, horizon(eq, tree, scale), state(eq, a[..k].to_vec(), b[..k].to_vec()));
        match eq {
            Equation::Wave => {
                if let Ok((f, r)) = wave_control(&p) {
                    if r.gram_condition < 1e10 {
                        let res = moment_residual(&f, s, &p, k).unwrap();
                        let worst = res.iter().fold(0.0f64, |m, z| m.max(z.norm()));
                        prop_assert!(worst <= 1e-8 * r.target_scale, "{worst} vs {}", r.target_scale);
                    }
                }
            }
            _ => {
                let out = if eq == Equation::Heat { heat_null_control(&p) } else { schrodinger_control(&p) };
                if let Ok((f, r)) = out {
                    if r.gram_condition < 1e10 {
                        let res = moment_residual(&f, s, &p, k).unwrap();
                        let worst = res.iter().fold(0.0f64, |m, z| m.max(z.norm()));
                        prop_assert!(worst <= 1e-8 * r.target_scale, "{worst} vs {}", r.target_scale);
                    }
                }
            }
        }
    }

    #[test]
    fn synthesis_is_linear(
        which in 0usize..3,
        eq in equation(),
        a1 in proptest::collection::vec(-1.0f64..1.0, 6),
        a2 in proptest::collection::vec(-1.0f64..1.0, 6),
    ) {
        let (tree, s, _) = &trees()[which];
        let t = horizon(eq, tree, 1.0);
        let sum: Vec<f64> = a1.iter().zip(&a2).map(|(x, y)| x + y).collect();
        let f = |a: &[f64]| synth(&ControlProblem::new(eq, s, ChannelSet::Full, t, state(eq, a.to_vec(), a.to_vec()))).unwrap();
        let (f1, f2, f12) = (f(&a1), f(&a2), f(&sum));
        let mut scale = 0.0f64;
        let mut worst = 0.0f64;
        for i in 0..=60 {
            let x = t * i as f64 / 60.0;
            let (u, v, w) = (f1.eval(x), f2.eval(x), f12.eval(x));
            for c in 0..u.len() {
                scale = scale.max(w[c].norm());
                worst = worst.max((u[c] + v[c] - w[c]).norm());
            }
        }
        prop_assert!(worst <= 1e-10 * scale.max(1.0), "{worst}");
    }
}

#[test]
fn minimal_norm_is_orthogonal_to_moment_kernel() {
    // `g` has zero moments on the first K modes, so the minimal control `f`
    // must be orthogonal to it: ‖f + g‖² = ‖f‖² + ‖g‖².
    let (tree, s, _) = &trees()[2];
    let t = tree.optical_diameter().value;
    let k = 6;
    for eq in [Equation::Wave, Equation::Heat, Equation::Schrodinger] {
        let t = if eq == Equation::Wave { t } else { 0.5 };
        let a: Vec<f64> = (0..k).map(|i| 0.3 + 0.1 * i as f64).collect();
        let p = ControlProblem::new(eq, s, ChannelSet::Full, t, state(eq, a.clone(), a.clone()));
        let f = synth(&p).unwrap();
        let mut extra = vec![0.0; k + 3];
        extra[k..].copy_from_slice(&[0.7, -0.4, 0.2]);
        let g = synth(&ControlProblem::new(eq, s, ChannelSet::Full, t, state(eq, extra.clone(), extra))).unwrap();
        let h = f.plus(&g).unwrap();
        let r0 = moment_residual(&f, s, &p, k).unwrap();
        let r1 = moment_residual(&h, s, &p, k).unwrap();
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in r0.iter().zip(&r1) {
            assert!((x - y).norm() <= 1e-10 * scale, "{eq:?}: moments moved by {}", (x - y).norm());
        }
        let (nf, ng, nh) = (f.l2_norm(), g.l2_norm(), h.l2_norm());
        assert!(nh > nf);
        assert!((nh * nh - nf * nf - ng * ng).abs() <= 1e-8 * nh * nh, "{eq:?}: {nh} {nf} {ng}");
    }
}

#[test]
fn single_end_interval_needs_twice_the_length() {
    let iv = build_tree(GraphSpec::interval(PI, DensityProfile::Constant(1.0))).unwrap();
    let s = solve_spectrum(&iv, &MeshConfig::uniform(1000), 20).unwrap();
    for k in [10, 20] {
        let sk = s.truncated(k);
        let st = ModalState::with_velocity(vec![1.0; k], vec![0.5; k]);
        let at = |t: f64| wave_control(&ControlProblem::new(Equation::Wave, &sk, ChannelSet::AllBut(0), t, st.clone()));
        match at(PI) {
            Err(SynthesisError::NumericallySingular { .. }) => {}
            Ok((_, r)) => assert!(r.relative_residual() > 1e-8, "K={k}: {}", r.relative_residual()),
            Err(e) => panic!("{e}"),
        }
        let (_, r) = at(2.0 * PI).unwrap();
        assert!(r.relative_residual() <= 1e-8);
    }
}

#[test]
fn controls_do_not_depend_on_the_cluster_basis() {
    let (tree, s, _) = &trees()[1];
    let cluster = s.clusters().iter().find(|r| r.len() == 2).unwrap().clone();
    let (sn, cs) = 0.83f64.sin_cos();
    let q = DMatrix::from_row_slice(2, 2, &[cs, -sn, sn, cs]);
    let r = s.remixed(cluster.clone(), &q);
    let k = 7;
    let a: Vec<f64> = (0..k).map(|i| ((i * 7 + 3) % 5) as f64 / 5.0 - 0.4).collect();
    // Same function in the rotated basis: a' = qᵀ a on the cluster.
    let mut a_rot = a.clone();
    let block = q.transpose() * nalgebra::DVector::from_column_slice(&a[cluster.clone()]);
    a_rot[cluster.clone()].copy_from_slice(block.as_slice());

    let t = tree.optical_diameter().value;
    let f = synth(&ControlProblem::new(Equation::Wave, s, ChannelSet::Full, t, state(Equation::Wave, a.clone(), a.clone()))).unwrap();
    let g = synth(&ControlProblem::new(Equation::Wave, &r, ChannelSet::Full, t, state(Equation::Wave, a_rot.clone(), a_rot.clone()))).unwrap();
    for i in 0..=40 {
        let x = t * i as f64 / 40.0;
        for (u, v) in f.eval(x).iter().zip(g.eval(x)) {
            assert!((u - v).norm() <= 1e-8, "t={x}");
        }
    }
    let lam = s.eigenvalues();
    let fin_a = wave_forward(s, &f, k, &[0.0, t]).unwrap().final_state();
    let fin_b = wave_forward(&r, &g, k, &[0.0, t]).unwrap().final_state();
    let na = wave_norm(&fin_a.a, &fin_a.velocity(), lam);
    let nb = wave_norm(&fin_b.a, &fin_b.velocity(), lam);
    assert!((na - nb).abs() <= 1e-8 * na);

    let heat = |sd: &SpectralData<f64>, a: &[f64]| {
        let init = ModalState::new(a.to_vec());
        let f = synth(&ControlProblem::new(Equation::Heat, sd, ChannelSet::AllBut(1), 0.5, init.clone())).unwrap();
        let fin = heat_forward(sd, &init, &f, k, &[0.0, 0.5]).unwrap();
        (f.l2_norm(), fin.final_values().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
    };
    let (ha, hb) = (heat(s, &a), heat(&r, &a_rot));
    assert!((ha.0 - hb.0).abs() <= 1e-8 * ha.0);
    assert!((ha.1 - hb.1).abs() <= 1e-8);
}
