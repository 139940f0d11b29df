use graphctl::control::{BoundaryControl, Equation};
use graphctl::evolution::{fdtd_time_step, fdtd_wave, heat_forward, lift, project, schrodinger_forward, wave_forward, wave_forward_from};
use graphctl::families::ChannelSet;
use graphctl::graph::{build_tree, GraphSpec, MetricTree};
use graphctl::spectral::{solve_spectrum, MeshConfig, ModalState, SpectralData};
use graphctl::synthesis::{heat_null_control, schrodinger_control, wave_control, ControlProblem};
use graphctl::scalar::Cplx;
use proptest::prelude::*;
use std::sync::OnceLock;

fn weighted() -> &'static (MetricTree<f64>, SpectralData<f64>) {
    static CELL: OnceLock<(MetricTree<f64>, SpectralData<f64>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = build_tree(GraphSpec::star(&[1.0, 2.0, 3.0], &[1.0, 2.25, 4.0])).unwrap();
        let s = solve_spectrum(&t, &MeshConfig::per_optical_length(80.0), 8).unwrap();
        (t, s)
    })
}

fn some_control(eq: Equation) -> (BoundaryControl<f64>, f64) {
    let (tree, s) = weighted();
    let t = if eq == Equation::Wave { tree.optical_diameter().value } else { 0.4 };
    let a = vec![0.5, -0.3, 0.2, 0.1, -0.1, 0.05];
    let st = if eq == Equation::Wave { ModalState::with_velocity(a.clone(), a) } else { ModalState::new(a) };
    let p = ControlProblem::new(eq, s, ChannelSet::Full, t, st);
    let f = match eq {
        Equation::Wave => wave_control(&p),
        Equation::Heat => heat_null_control(&p),
        Equation::Schrodinger => schrodinger_control(&p),
    }
    .unwrap()
    .0;
    (f, t)
}

#[test]
fn duhamel_splits_at_half_time() {
    let (_, s) = weighted();
    let k = 8;

    let (f, t) = some_control(Equation::Wave);
    let early = f.restricted(t / 2.0);
    let whole = wave_forward(s, &early, k, &[0.0, t]).unwrap();
    let mid = wave_forward(s, &early, k, &[0.0, t / 2.0]).unwrap().final_state();
    let zero = BoundaryControl::zero(f.boundary_ids().to_vec(), f.channel_ids().to_vec(), t, true).unwrap();
    let rest = wave_forward_from(s, &mid, &zero, k, &[0.0, t / 2.0]).unwrap();
    for (x, y) in whole.final_values().iter().zip(rest.final_values()) {
        assert!((x - y).norm() < 1e-12, "wave {x} {y}");
    }

    let (f, t) = some_control(Equation::Heat);
    let init = ModalState::new(vec![0.5, -0.3, 0.2, 0.1, -0.1, 0.05, 0.0, 0.0]);
    let early = f.restricted(t / 2.0);
    let whole = heat_forward(s, &init, &early, k, &[0.0, t]).unwrap();
    let mid = heat_forward(s, &init, &early, k, &[0.0, t / 2.0]).unwrap().final_state();
    let zero = BoundaryControl::zero(f.boundary_ids().to_vec(), f.channel_ids().to_vec(), t, true).unwrap();
    let rest = heat_forward(s, &mid, &zero, k, &[0.0, t / 2.0]).unwrap();
    for (x, y) in whole.final_values().iter().zip(rest.final_values()) {
        assert!((x - y).norm() < 1e-12, "heat {x} {y}");
    }

    // Schrödinger states are complex; the free flow after T/2 is a phase.
    let (f, t) = some_control(Equation::Schrodinger);
    let early = f.restricted(t / 2.0);
    let traj = schrodinger_forward(s, &init, &early, k, &[0.0, t / 2.0, t]).unwrap();
    let lam = s.eigenvalues();
    for m in 0..k {
        let phase = Cplx::new(0.0, lam[m] * t / 2.0).exp();
        let z = traj.values[1][m] * phase - traj.values[2][m];
        assert!(z.norm() < 1e-12, "schrodinger mode {m}: {}", z.norm());
    }
}

#[test]
fn spectral_and_fdtd_agree_on_weighted_star() {
    let (tree, s) = weighted();
    let (f, t) = some_control(Equation::Wave);
    let k = 6;
    let spectral = wave_forward(s, &f, k, &[0.0, t]).unwrap().final_state();
    let dt = fdtd_time_step(tree, s.layout(), t);
    let grid = fdtd_wave(tree, &f, t, s.layout(), dt).unwrap();
    let fd = project(&grid, s, k).unwrap();
    let scale = spectral.a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (x, y) in spectral.a.iter().zip(&fd.a) {
        assert!((x - y).abs() < 5e-3 * scale.max(1.0), "{x} {y}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn project_inverts_lift(
        a in proptest::collection::vec(-2.0f64..2.0, 8),
        b in proptest::collection::vec(-2.0f64..2.0, 8),
    ) {
        let (_, s) = weighted();
        let m = ModalState::with_velocity(a, b);
        let back = project(&lift(&m, s).unwrap(), s, 8).unwrap();
        for (x, y) in m.a.iter().zip(&back.a).chain(m.velocity().iter().zip(&back.velocity())) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }
}
