//! Explicit leapfrog (velocity Verlet) on the lumped-mass P1 mesh.
//!
//! Interior vertices carry a single unknown whose lumped mass collects the
//! half-cells of every incident edge, so the Kirchhoff balance is built into
//! the stiffness row. Boundary nodes take the control values.

use super::EvolutionError;
use crate::control::{BoundaryControl, ControlError};
use crate::graph::MetricTree;
use crate::scalar::Real;
use crate::spectral::{Assembly, MeshLayout, ModalState, SpectralData};

/// Nodal displacement and velocity at one instant, indexed by mesh node id.
#[derive(Debug, Clone)]
pub struct GridState<T> {
    pub time: T,
    pub values: Vec<T>,
    pub velocities: Vec<T>,
    layout: MeshLayout<T>,
}

impl<T: Real> GridState<T> {
    pub fn new(time: T, values: Vec<T>, velocities: Vec<T>, layout: MeshLayout<T>) -> Self {
        assert_eq!(values.len(), layout.node_count());
        assert_eq!(velocities.len(), layout.node_count());
        Self { time, values, velocities, layout }
    }

    pub fn layout(&self) -> &MeshLayout<T> {
        &self.layout
    }

    /// Displacement along an edge (graph-spec edge order), tail to head.
    pub fn on_edge(&self, edge: usize) -> Vec<T> {
        self.layout.edge_nodes(edge).iter().map(|&n| self.values[n]).collect()
    }

    /// Discrete energy `½ vᵀ M_L v + ½ uᵀ K u`.
    pub fn energy(&self, asm: &Assembly<T>) -> T {
        let order = &self.layout.order;
        let u: Vec<T> = order.iter().map(|&n| self.values[n]).collect();
        let ku = asm.stiffness.mul_vec(&u);
        let pot = ku.iter().zip(&u).fold(T::zero(), |s, (&a, &b)| s + a * b);
        let kin = order
            .iter()
            .enumerate()
            .fold(T::zero(), |s, (p, &n)| s + asm.lumped_mass[p] * self.velocities[n] * self.velocities[n]);
        (pot + kin) * T::lit(0.5)
    }
}

/// Largest stable step `0.9 · min(√ρ h)` rounded down so that it divides `t`.
pub fn fdtd_time_step<T: Real>(tree: &MetricTree<T>, layout: &MeshLayout<T>, t: T) -> T {
    let limit = cfl_limit(tree, layout);
    let n = (t / limit).ceil().to_f64_lossy().max(1.0) as usize;
    t / T::from_count(n)
}

fn cfl_limit<T: Real>(tree: &MetricTree<T>, layout: &MeshLayout<T>) -> T {
    tree.edges()
        .iter()
        .enumerate()
        .map(|(k, e)| e.density.profile().min_on(e.length).sqrt() * layout.edge_step(k))
        .fold(T::max_value().unwrap(), |a, b| a.min(b))
        * T::lit(0.9)
}

/// Steps `ρ u_tt = u_xx` from rest to time `t` with Dirichlet data from
/// `control`.
pub fn fdtd_wave<T: Real>(
    tree: &MetricTree<T>,
    control: &BoundaryControl<T>,
    t: T,
    layout: &MeshLayout<T>,
    dt: T,
) -> Result<GridState<T>, EvolutionError> {
    let n = layout.node_count();
    let rest = GridState::new(T::zero(), vec![T::zero(); n], vec![T::zero(); n], layout.clone());
    fdtd_wave_from(tree, &rest, control, t, dt)
}

/// Same as [`fdtd_wave`] from initial data at time zero. Boundary values of
/// `initial` are overwritten by the control.
pub fn fdtd_wave_from<T: Real>(
    tree: &MetricTree<T>,
    initial: &GridState<T>,
    control: &BoundaryControl<T>,
    t: T,
    dt: T,
) -> Result<GridState<T>, EvolutionError> {
    let layout = initial.layout();
    if !control.is_real() {
        return Err(ControlError::Invalid("the wave solver needs a real control".into()).into());
    }
    if control.boundary_ids() != tree.boundary_ids().as_slice() {
        return Err(ControlError::InconsistentChannels("control and tree disagree on the boundary".into()).into());
    }
    let limit = cfl_limit(tree, layout);
    if !(dt > T::zero()) || dt > limit * (T::one() + T::lit(1e-12)) {
        return Err(EvolutionError::CFLViolation { dt: dt.to_f64_lossy(), limit: limit.to_f64_lossy() });
    }
    let asm = Assembly::new(tree, layout);
    let n = layout.node_count();
    let steps = (t / dt).round().to_f64_lossy() as usize;
    let boundary_pos: Vec<usize> = tree.boundary_indices().iter().map(|&b| layout.position[b]).collect();
    let mut fixed = vec![false; n];
    for &p in &boundary_pos {
        fixed[p] = true;
    }
    let inv_mass: Vec<T> = asm.lumped_mass.iter().map(|&m| T::one() / m).collect();
    let accel = |u: &[T]| -> Vec<T> {
        let ku = asm.stiffness.mul_vec(u);
        (0..n).map(|p| if fixed[p] { T::zero() } else { -ku[p] * inv_mass[p] }).collect()
    };
    let set_boundary = |u: &mut [T], v: &mut [T], time: T| {
        let f = control.eval_boundary(time);
        let df = control.derivative(time);
        let ids = control.channel_ids();
        for (g, &p) in boundary_pos.iter().enumerate() {
            u[p] = f[g].re;
            let id = control.boundary_ids()[g];
            v[p] = ids.iter().position(|&c| c == id).map_or(T::zero(), |i| df[i].re);
        }
    };
    if initial.values.len() != n || initial.velocities.len() != n {
        return Err(EvolutionError::IncompatibleMesh);
    }
    let mut u: Vec<T> = layout.order.iter().map(|&i| initial.values[i]).collect();
    let mut v: Vec<T> = layout.order.iter().map(|&i| initial.velocities[i]).collect();
    set_boundary(&mut u, &mut v, T::zero());
    let mut a = accel(&u);
    let half = dt * T::lit(0.5);
    for step in 0..steps {
        let time = dt * T::from_count(step + 1);
        for p in 0..n {
            if !fixed[p] {
                v[p] += half * a[p];
                u[p] += dt * v[p];
            }
        }
        set_boundary(&mut u, &mut v, time);
        a = accel(&u);
        for p in 0..n {
            if !fixed[p] {
                v[p] += half * a[p];
            }
        }
    }
    let mut values = vec![T::zero(); n];
    let mut velocities = vec![T::zero(); n];
    for p in 0..n {
        values[layout.order[p]] = u[p];
        velocities[layout.order[p]] = v[p];
    }
    Ok(GridState::new(dt * T::from_count(steps), values, velocities, layout.clone()))
}

fn same_mesh<T: Real>(a: &MeshLayout<T>, b: &MeshLayout<T>) -> bool {
    a.node_count() == b.node_count() && a.elements_per_edge() == b.elements_per_edge()
}

/// `a_k = ∫ u φ_k ρ`, `b_k = ∫ u_t φ_k ρ` for the first `k` modes.
pub fn project<T: Real>(grid: &GridState<T>, spectral: &SpectralData<T>, k: usize) -> Result<ModalState<T>, EvolutionError> {
    if !same_mesh(grid.layout(), spectral.layout()) {
        return Err(EvolutionError::IncompatibleMesh);
    }
    if k > spectral.mode_count() {
        return Err(EvolutionError::ModeCount { requested: k, available: spectral.mode_count() });
    }
    let asm = spectral.assembly();
    let lay = spectral.layout();
    let a = (0..k).map(|m| asm.mass_inner(lay, &grid.values, spectral.mode(m))).collect();
    let b = (0..k).map(|m| asm.mass_inner(lay, &grid.velocities, spectral.mode(m))).collect();
    Ok(ModalState::with_velocity(a, b))
}

/// `u = Σ a_k φ_k`, `u_t = Σ b_k φ_k` on the spectral mesh.
pub fn lift<T: Real>(modal: &ModalState<T>, spectral: &SpectralData<T>) -> Result<GridState<T>, EvolutionError> {
    if modal.len() > spectral.mode_count() {
        return Err(EvolutionError::ModeCount { requested: modal.len(), available: spectral.mode_count() });
    }
    let n = spectral.layout().node_count();
    let b = modal.velocity();
    let mut u = vec![T::zero(); n];
    let mut v = vec![T::zero(); n];
    for m in 0..modal.len() {
        for (i, &phi) in spectral.mode(m).iter().enumerate() {
            u[i] += modal.a[m] * phi;
            v[i] += b[m] * phi;
        }
    }
    Ok(GridState::new(T::zero(), u, v, spectral.layout().clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_tree, DensityProfile, GraphSpec};
    use crate::spectral::{solve_spectrum, MeshConfig};
    use std::f64::consts::PI;

    #[test]
    fn lift_project_roundtrip() {
        let tree = build_tree(GraphSpec::star(&[1.0_f64, 2.0, 3.0], &[1.0, 2.25, 4.0])).unwrap();
        let s = solve_spectrum(&tree, &MeshConfig::per_optical_length(60.0), 6).unwrap();
        let m = ModalState::with_velocity(vec![1.0, 0.0, -0.5, 0.25, 0.0, 2.0], vec![0.0, 1.0, 0.0, 0.0, 3.0, 0.0]);
        let back = project(&lift(&m, &s).unwrap(), &s, 6).unwrap();
        for (x, y) in m.a.iter().zip(&back.a).chain(m.velocity().iter().zip(&back.velocity())) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_control_stays_at_rest_and_cfl_is_enforced() {
        let tree = build_tree(GraphSpec::interval(PI, DensityProfile::Constant(1.0))).unwrap();
        let s = solve_spectrum(&tree, &MeshConfig::uniform(100), 2).unwrap();
        let ids = tree.boundary_ids();
        let f = BoundaryControl::zero(ids.clone(), ids, 1.0, true).unwrap();
        let dt = fdtd_time_step(&tree, s.layout(), 1.0);
        let g = fdtd_wave(&tree, &f, 1.0, s.layout(), dt).unwrap();
        assert!(g.values.iter().all(|&v| v == 0.0));
        let h = s.layout().edge_step(0);
        assert!(matches!(fdtd_wave(&tree, &f, 1.0, s.layout(), h), Err(EvolutionError::CFLViolation { .. })));
    }
}
