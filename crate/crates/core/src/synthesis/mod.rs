//! Boundary control synthesis from truncated moment problems.
//!
//! Sign conventions follow the physical systems: with `κ` the boundary
//! derivative taken toward the vertex, a Dirichlet datum `f` enters the modal
//! equations as
//!
//! * wave: `c_k'' + λ_k c_k = −Σ_γ κ_k(γ) f(γ, t)`,
//! * heat: `c_k' + λ_k c_k = −Σ_γ κ_k(γ) f(γ, t)`,
//! * Schrödinger: `c_k' = iλ_k c_k + i Σ_γ κ_k(γ) f(γ, t)`.
//!
//! Each synthesis returns the minimal-`L_2` control in the span of the
//! matching exponential family evaluated at reversed time.

use crate::control::{BoundaryControl, ControlError, Equation, ExpAtom};
use crate::families::{complex_gram, real_gram, ChannelSet, FamilyError, FamilyKind, FamilySpec, GramMatrix, GramScalar};
use crate::graph::MetricTree;
use crate::scalar::{c, cabs, cexp, cr, Cplx, Real};
use crate::spectral::{ModalState, SpectralData};
use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("Gram matrix numerically singular (condition {condition:.3e}, rank {rank} of {dim}); shorten K or lengthen the horizon")]
    NumericallySingular { condition: f64, rank: usize, dim: usize },
    #[error("inconsistent channels: {0}")]
    InconsistentChannels(String),
    #[error("horizon must be positive")]
    InvalidHorizon,
    #[error("{requested} modes requested, {available} available")]
    ModeCount { requested: usize, available: usize },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Control(#[from] ControlError),
}

impl From<SynthesisError> for ControlError {
    fn from(e: SynthesisError) -> Self {
        ControlError::Invalid(e.to_string())
    }
}

/// One control task: steer from rest to `(a, b)` (wave) or from `a` to zero
/// (heat, Schrödinger) in time `horizon`, using the first `modes` modes.
#[derive(Debug, Clone)]
pub struct ControlProblem<'a, T> {
    pub equation: Equation,
    pub spectral: &'a SpectralData<T>,
    pub channels: ChannelSet,
    pub horizon: T,
    pub state: ModalState<T>,
    pub modes: usize,
}

impl<'a, T: Real> ControlProblem<'a, T> {
    pub fn new(equation: Equation, spectral: &'a SpectralData<T>, channels: ChannelSet, horizon: T, state: ModalState<T>) -> Self {
        let modes = state.len();
        Self { equation, spectral, channels, horizon, state, modes }
    }

    fn validate(&self) -> Result<(), SynthesisError> {
        if !(self.horizon > T::zero()) {
            return Err(SynthesisError::InvalidHorizon);
        }
        if self.modes == 0 || self.modes > self.spectral.mode_count() {
            return Err(SynthesisError::ModeCount { requested: self.modes, available: self.spectral.mode_count() });
        }
        if self.state.len() > self.modes {
            return Err(SynthesisError::ModeCount { requested: self.state.len(), available: self.modes });
        }
        self.channels.columns(self.spectral.boundary_ids()).map_err(|e| SynthesisError::InconsistentChannels(e.to_string()))?;
        Ok(())
    }

    fn coeff(&self, k: usize) -> T {
        self.state.a.get(k).copied().unwrap_or_else(T::zero)
    }

    fn velocity(&self, k: usize) -> T {
        self.state.b.as_ref().and_then(|b| b.get(k).copied()).unwrap_or_else(T::zero)
    }
}

/// Critical wave control time: `d(Ω)` for the full boundary, `2 d_1(γ_1, Ω)`
/// when `γ_1` is excluded.
pub fn default_wave_horizon<T: Real>(tree: &MetricTree<T>, channels: ChannelSet) -> Result<T, SynthesisError> {
    match channels {
        ChannelSet::Full => Ok(tree.optical_diameter().value),
        ChannelSet::AllBut(v) => tree
            .eccentricity(v)
            .map(|d| d + d)
            .map_err(|e| SynthesisError::InconsistentChannels(e.to_string())),
    }
}

/// Diagnostics of a synthesis.
#[derive(Debug, Clone)]
pub struct SynthesisReport<T> {
    pub equation: Equation,
    pub modes: usize,
    pub horizon: T,
    pub channel_ids: Vec<usize>,
    /// `|achieved − target|` per moment (2K entries for the wave: sine
    /// moments, then cosine moments).
    pub residuals: Vec<T>,
    /// Largest target moment magnitude.
    pub target_scale: T,
    pub gram_sigma_min: T,
    pub gram_condition: T,
    pub rank: usize,
    pub cutoff_warning: bool,
    pub control_l2: T,
    /// Heuristic bound on `‖α_k‖` for modes past the truncation: twice the
    /// largest resolved value.
    pub tail_alpha_bound: T,
}

impl<T: Real> SynthesisReport<T> {
    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, &r| m.max(r))
    }

    /// `max |residual| / max |target|` (absolute when the target is zero).
    pub fn relative_residual(&self) -> T {
        if self.target_scale > T::zero() {
            self.max_residual() / self.target_scale
        } else {
            self.max_residual()
        }
    }

    /// Cauchy–Schwarz bound on the moment of an unconstrained mode with
    /// eigenvalue `lambda`: `‖α‖ · ‖kernel‖_{L_2} · ‖f‖`.
    pub fn predicted_tail(&self, lambda: T) -> T {
        let kernel = match self.equation {
            Equation::Heat => (-(-(lambda + lambda) * self.horizon).exp_m1() / (lambda + lambda)).sqrt(),
            _ => self.horizon.sqrt(),
        };
        self.tail_alpha_bound * kernel * self.control_l2
    }
}

fn family<T: Real>(p: &ControlProblem<T>, kind: FamilyKind) -> Result<FamilySpec<T>, SynthesisError> {
    Ok(FamilySpec::from_spectral(kind, p.spectral, p.channels, p.modes, p.horizon)?)
}

/// Control atoms `Σ_j x_j · member_j(T − s)`.
fn reversed_atoms<T: Real>(fam: &FamilySpec<T>, x: &[Cplx<T>], conjugate: bool) -> Vec<ExpAtom<T>> {
    let t = fam.horizon();
    let mut atoms = Vec::new();
    for (j, &xj) in x.iter().enumerate() {
        if xj == cr(T::zero()) {
            continue;
        }
        let (terms, n) = fam.terms(j);
        let profile: Vec<T> = fam.amplitudes().row(fam.member_mode(j)).iter().copied().collect();
        for &(coef, rate) in &terms[..n] {
            let (coef, rate) = if conjugate { (coef.conj(), rate.conj()) } else { (coef, rate) };
            // coef · e^{rate (T − s)} = coef · e^{−rate (s − T)}
            atoms.push(ExpAtom { coeff: xj * coef, profile: profile.clone(), rate: -rate, anchor: t, window: (T::zero(), t) });
        }
    }
    atoms
}

fn solve<T: Real, S: GramScalar<T>>(g: &GramMatrix<T, S>, rhs: &DVector<S>) -> Result<DVector<S>, SynthesisError> {
    let s = g.solve(rhs);
    if s.truncated {
        return Err(SynthesisError::NumericallySingular { condition: g.condition().to_f64_lossy(), rank: s.rank, dim: g.dim() });
    }
    Ok(s.combined())
}

fn alpha_bound<T: Real>(p: &ControlProblem<T>) -> T {
    let cols = p.channels.columns(p.spectral.boundary_ids()).unwrap_or_default();
    let a = p.spectral.alpha();
    let worst = (0..p.modes).fold(T::zero(), |m, k| m.max(cols.iter().fold(T::zero(), |s, &j| s + a[(k, j)] * a[(k, j)]).sqrt()));
    worst + worst
}

fn finish<T: Real>(
    p: &ControlProblem<T>,
    control: BoundaryControl<T>,
    cond: (T, T, usize, bool),
    targets: T,
) -> Result<(BoundaryControl<T>, SynthesisReport<T>), SynthesisError> {
    let residuals = moment_residual(&control, p.spectral, p, p.modes)?.iter().map(|z| cabs(*z)).collect();
    let report = SynthesisReport {
        equation: p.equation,
        modes: p.modes,
        horizon: p.horizon,
        channel_ids: control.channel_ids().to_vec(),
        residuals,
        target_scale: targets,
        gram_sigma_min: cond.0,
        gram_condition: cond.1,
        rank: cond.2,
        cutoff_warning: cond.3,
        control_l2: control.l2_norm(),
        tail_alpha_bound: alpha_bound(p),
    };
    Ok((control, report))
}

fn check_equation<T: Real>(p: &ControlProblem<T>, eq: Equation) -> Result<(), SynthesisError> {
    p.validate()?;
    if p.equation != eq {
        return Err(SynthesisError::InconsistentChannels(format!("problem is for the {} equation", p.equation.name())));
    }
    Ok(())
}

/// Minimal-norm wave control reaching `(a, b)` from rest at time `T`.
pub fn wave_control<T: Real>(p: &ControlProblem<T>) -> Result<(BoundaryControl<T>, SynthesisReport<T>), SynthesisError> {
    check_equation(p, Equation::Wave)?;
    let fam = family(p, FamilyKind::SinCos)?;
    let g = real_gram(&fam)?;
    let k = p.modes;
    let w = fam.eigenvalues().iter().map(|l| l.sqrt()).collect::<Vec<_>>();
    let rhs = DVector::from_fn(2 * k, |i, _| if i < k { -p.coeff(i) } else { -p.velocity(i - k) / w[i - k] });
    let scale = rhs.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let x = solve(&g, &rhs)?;
    let xc: Vec<Cplx<T>> = x.iter().map(|&v| cr(v)).collect();
    let control = BoundaryControl::from_atoms(
        p.spectral.boundary_ids().to_vec(),
        fam.channel_ids().to_vec(),
        p.horizon,
        true,
        reversed_atoms(&fam, &xc, false),
    )?;
    finish(p, control, (g.sigma_min(), g.condition(), g.rank(), g.is_singular()), scale)
}

/// Heat null control from initial coefficients `a` at time `τ`.
pub fn heat_null_control<T: Real>(p: &ControlProblem<T>) -> Result<(BoundaryControl<T>, SynthesisReport<T>), SynthesisError> {
    check_equation(p, Equation::Heat)?;
    let fam = family(p, FamilyKind::Parabolic)?;
    let g = real_gram(&fam)?;
    let tau = p.horizon;
    let rhs = DVector::from_fn(p.modes, |k, _| {
        let l = fam.eigenvalues()[k];
        p.coeff(k) * (-l * tau).exp() / l.sqrt()
    });
    let scale = rhs.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let x = solve(&g, &rhs)?;
    let xc: Vec<Cplx<T>> = x.iter().map(|&v| cr(v)).collect();
    let control = BoundaryControl::from_atoms(
        p.spectral.boundary_ids().to_vec(),
        fam.channel_ids().to_vec(),
        tau,
        true,
        reversed_atoms(&fam, &xc, false),
    )?;
    finish(p, control, (g.sigma_min(), g.condition(), g.rank(), g.is_singular()), scale)
}

/// Complex-valued Schrödinger null control from initial coefficients `a`.
pub fn schrodinger_control<T: Real>(p: &ControlProblem<T>) -> Result<(BoundaryControl<T>, SynthesisReport<T>), SynthesisError> {
    check_equation(p, Equation::Schrodinger)?;
    let fam = family(p, FamilyKind::Schrodinger)?;
    let g = complex_gram(&fam);
    let tau = p.horizon;
    let rhs = DVector::from_fn(p.modes, |k, _| {
        let l = fam.eigenvalues()[k];
        c(T::zero(), p.coeff(k) / l.sqrt()) * cexp(c(T::zero(), l * tau))
    });
    let scale = rhs.iter().fold(T::zero(), |m, v| m.max(cabs(*v)));
    let x = solve(&g, &rhs)?;
    let control = BoundaryControl::from_atoms(
        p.spectral.boundary_ids().to_vec(),
        fam.channel_ids().to_vec(),
        tau,
        false,
        reversed_atoms(&fam, x.as_slice(), true),
    )?;
    finish(p, control, (g.sigma_min(), g.condition(), g.rank(), g.is_singular()), scale)
}

/// Weights `α_k(γ)` of mode `k` on the control's channels.
pub(crate) fn channel_weights<T: Real>(control: &BoundaryControl<T>, spectral: &SpectralData<T>, k: usize, use_kappa: bool) -> Result<Vec<T>, ControlError> {
    if control.boundary_ids() != spectral.boundary_ids() {
        return Err(ControlError::InconsistentChannels("control and spectral data disagree on the boundary".into()));
    }
    let src = if use_kappa { spectral.kappa() } else { spectral.alpha() };
    control
        .channel_ids()
        .iter()
        .map(|id| {
            let col = spectral.boundary_ids().iter().position(|b| b == id).ok_or_else(|| {
                ControlError::InconsistentChannels(format!("channel {id} is not a boundary vertex"))
            })?;
            Ok(src[(k, col)])
        })
        .collect()
}

/// Achieved minus prescribed moments for the first `k_check` modes. Modes
/// beyond the problem's state count have zero targets.
pub fn moment_residual<T: Real>(
    control: &BoundaryControl<T>,
    spectral: &SpectralData<T>,
    problem: &ControlProblem<T>,
    k_check: usize,
) -> Result<Vec<Cplx<T>>, SynthesisError> {
    if k_check > spectral.mode_count() {
        return Err(SynthesisError::ModeCount { requested: k_check, available: spectral.mode_count() });
    }
    let t = problem.horizon;
    let lam = spectral.eigenvalues();
    let i = c(T::zero(), T::one());
    let mut out = Vec::with_capacity(2 * k_check);
    let mut cos_part = Vec::new();
    for k in 0..k_check {
        let w = channel_weights(control, spectral, k, false)?;
        let a = problem.coeff(k);
        match problem.equation {
            Equation::Wave => {
                let om = lam[k].sqrt();
                let jp = control.convolve(&w, c(T::zero(), om), t);
                let jm = control.convolve(&w, c(T::zero(), -om), t);
                let s = (jp - jm) / (i + i);
                let co = (jp + jm) * cr(T::lit(0.5));
                out.push(s + cr(a));
                cos_part.push(co + cr(problem.velocity(k) / om));
            }
            Equation::Heat => {
                let j = control.convolve(&w, cr(-lam[k]), t);
                out.push(j - cr(a * (-lam[k] * t).exp() / lam[k].sqrt()));
            }
            Equation::Schrodinger => {
                let j = control.convolve(&w, c(T::zero(), lam[k]), t);
                out.push(j - i * cr(a / lam[k].sqrt()) * cexp(c(T::zero(), lam[k] * t)));
            }
        }
    }
    out.extend(cos_part);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_tree, DensityProfile, GraphSpec};
    use crate::spectral::{solve_spectrum, MeshConfig};
    use std::f64::consts::PI;

    fn interval(k: usize) -> (MetricTree<f64>, SpectralData<f64>) {
        let tree = build_tree(GraphSpec::interval(PI, DensityProfile::Constant(1.0))).unwrap();
        let s = solve_spectrum(&tree, &MeshConfig::uniform(600), k).unwrap();
        (tree, s)
    }

    #[test]
    fn zero_target_gives_zero_control() {
        let (tree, s) = interval(6);
        let t = default_wave_horizon(&tree, ChannelSet::Full).unwrap();
        let p = ControlProblem::new(Equation::Wave, &s, ChannelSet::Full, t, ModalState::zeros(6));
        let (f, r) = wave_control(&p).unwrap();
        assert!(f.is_zero());
        assert_eq!(r.max_residual(), 0.0);
        for eq in [Equation::Heat, Equation::Schrodinger] {
            let p = ControlProblem::new(eq, &s, ChannelSet::Full, 0.5, ModalState::zeros(6));
            let (f, _) = if eq == Equation::Heat { heat_null_control(&p) } else { schrodinger_control(&p) }.unwrap();
            assert!(f.is_zero());
        }
    }

    #[test]
    fn zero_control_residual_is_target() {
        let (_, s) = interval(4);
        let p = ControlProblem::new(Equation::Wave, &s, ChannelSet::Full, PI, ModalState::unit(4, 0));
        let f = BoundaryControl::zero(s.boundary_ids().to_vec(), s.boundary_ids().to_vec(), PI, true).unwrap();
        let r = moment_residual(&f, &s, &p, 4).unwrap();
        assert_eq!(r[0], cr(1.0));
        assert!(r[1..].iter().all(|z| *z == cr(0.0)));
    }

    #[test]
    fn wave_moments_match() {
        let (tree, s) = interval(10);
        let t = default_wave_horizon(&tree, ChannelSet::Full).unwrap();
        let p = ControlProblem::new(Equation::Wave, &s, ChannelSet::Full, t, ModalState::unit(10, 0));
        let (_, r) = wave_control(&p).unwrap();
        assert!(r.relative_residual() < 1e-8, "{}", r.relative_residual());
        let single = ChannelSet::AllBut(0);
        let t2 = default_wave_horizon(&tree, single).unwrap();
        assert!((t2 - 2.0 * PI).abs() < 1e-12);
        let p = ControlProblem::new(Equation::Wave, &s, single, t2, ModalState::unit(10, 0));
        let (f, r) = wave_control(&p).unwrap();
        assert!(r.relative_residual() < 1e-8);
        assert_eq!(f.eval_boundary(1.0)[0], cr(0.0));
    }

    #[test]
    fn short_horizon_is_singular() {
        let (_, s) = interval(20);
        let p = ControlProblem::new(Equation::Wave, &s, ChannelSet::Full, 0.4 * PI, ModalState::unit(20, 0));
        assert!(matches!(wave_control(&p), Err(SynthesisError::NumericallySingular { .. })));
    }

    #[test]
    fn heat_and_schrodinger_moments() {
        let (_, s) = interval(8);
        let p = ControlProblem::new(Equation::Heat, &s, ChannelSet::Full, 0.5, ModalState::unit(8, 0));
        let (_, r) = heat_null_control(&p).unwrap();
        assert!(r.relative_residual() < 1e-8, "{}", r.relative_residual());
        let s6 = s.truncated(6);
        let p = ControlProblem::new(Equation::Schrodinger, &s6, ChannelSet::Full, 0.1, ModalState::unit(6, 0));
        let (f, r) = schrodinger_control(&p).unwrap();
        assert!(r.relative_residual() < 1e-8, "{}", r.relative_residual());
        assert!(!f.is_real());
    }
}
