//! Forward simulation in modal coordinates, plus an explicit finite
//! element time-stepper used as an independent check.

mod fdtd;

pub use fdtd::{fdtd_time_step, fdtd_wave, fdtd_wave_from, lift, project, GridState};

use crate::control::{BoundaryControl, ControlError, Equation};
use crate::scalar::{c, cexp, cr, Cplx, Real};
use crate::spectral::{ModalState, SpectralData};
use crate::synthesis::channel_weights;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("time grid must be nonnegative and strictly increasing")]
    InvalidGrid,
    #[error("{requested} modes requested, {available} available")]
    ModeCount { requested: usize, available: usize },
    #[error("time step {dt:.3e} violates the CFL limit {limit:.3e}")]
    CFLViolation { dt: f64, limit: f64 },
    #[error("grid state and spectral data use different meshes")]
    IncompatibleMesh,
}

/// Where a trajectory came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Spectral,
    FdtdProjected,
}

/// Modal coefficients on a time grid.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub equation: Equation,
    pub times: Vec<T>,
    /// Per time, one coefficient per mode.
    pub values: Vec<Vec<Cplx<T>>>,
    /// Per time `ċ_k` (wave only).
    pub velocities: Option<Vec<Vec<Cplx<T>>>>,
    pub provenance: Provenance,
}

impl<T: Real> Trajectory<T> {
    pub fn mode_count(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    pub fn final_values(&self) -> &[Cplx<T>] {
        self.values.last().map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn final_velocities(&self) -> Option<&[Cplx<T>]> {
        self.velocities.as_ref().and_then(|v| v.last()).map(|v| v.as_slice())
    }

    /// Real parts of the final coefficients and velocities.
    pub fn final_state(&self) -> ModalState<T> {
        let a = self.final_values().iter().map(|z| z.re).collect();
        match self.final_velocities() {
            Some(v) => ModalState::with_velocity(a, v.iter().map(|z| z.re).collect()),
            None => ModalState::new(a),
        }
    }
}

/// `n + 1` equally spaced times on `[0, t]`.
pub fn uniform_grid<T: Real>(t: T, n: usize) -> Vec<T> {
    let n = n.max(1);
    (0..=n).map(|i| t * T::from_count(i) / T::from_count(n)).collect()
}

fn check_grid<T: Real>(grid: &[T]) -> Result<(), EvolutionError> {
    if grid.is_empty() || grid[0] < T::zero() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EvolutionError::InvalidGrid);
    }
    Ok(())
}

fn check_modes<T: Real>(spectral: &SpectralData<T>, k: usize) -> Result<(), EvolutionError> {
    if k == 0 || k > spectral.mode_count() {
        return Err(EvolutionError::ModeCount { requested: k, available: spectral.mode_count() });
    }
    Ok(())
}

/// Wave equation from rest.
pub fn wave_forward<T: Real>(
    spectral: &SpectralData<T>,
    control: &BoundaryControl<T>,
    k: usize,
    grid: &[T],
) -> Result<Trajectory<T>, EvolutionError> {
    wave_forward_from(spectral, &ModalState::zeros(k), control, k, grid)
}

/// Wave equation from initial data `(a, b)`:
/// `c_k = a_k cos ω_k t + (b_k/ω_k) sin ω_k t − Σ_γ α_k(γ) ∫_0^t sin ω_k(t−s) f(γ, s) ds`.
pub fn wave_forward_from<T: Real>(
    spectral: &SpectralData<T>,
    initial: &ModalState<T>,
    control: &BoundaryControl<T>,
    k: usize,
    grid: &[T],
) -> Result<Trajectory<T>, EvolutionError> {
    check_grid(grid)?;
    check_modes(spectral, k)?;
    let lam = spectral.eigenvalues();
    control.check_resolution(lam[k - 1].sqrt())?;
    let b0 = initial.velocity();
    let mut values = vec![Vec::with_capacity(k); grid.len()];
    let mut velocities = vec![Vec::with_capacity(k); grid.len()];
    let i2 = c(T::zero(), T::lit(2.0));
    for m in 0..k {
        let w = channel_weights(control, spectral, m, false)?;
        let om = lam[m].sqrt();
        let (a, b) = (initial.a.get(m).copied().unwrap_or_else(T::zero), b0.get(m).copied().unwrap_or_else(T::zero));
        for (i, &t) in grid.iter().enumerate() {
            let jp = control.convolve(&w, c(T::zero(), om), t);
            let jm = control.convolve(&w, c(T::zero(), -om), t);
            let (s, co) = (om * t).sin_cos();
            let free = cr(a * co + b / om * s);
            let free_v = cr(-a * om * s + b * co);
            values[i].push(free - (jp - jm) / i2);
            velocities[i].push(free_v - (jp + jm) * cr(om * T::lit(0.5)));
        }
    }
    Ok(Trajectory { equation: Equation::Wave, times: grid.to_vec(), values, velocities: Some(velocities), provenance: Provenance::Spectral })
}

/// Heat equation: `c_k = a_k e^{−λ_k t} − Σ_γ κ_k(γ) ∫_0^t e^{−λ_k(t−s)} f(γ, s) ds`.
pub fn heat_forward<T: Real>(
    spectral: &SpectralData<T>,
    initial: &ModalState<T>,
    control: &BoundaryControl<T>,
    k: usize,
    grid: &[T],
) -> Result<Trajectory<T>, EvolutionError> {
    check_grid(grid)?;
    check_modes(spectral, k)?;
    let lam = spectral.eigenvalues();
    control.check_resolution(lam[k - 1])?;
    let mut values = vec![Vec::with_capacity(k); grid.len()];
    for m in 0..k {
        let w = channel_weights(control, spectral, m, true)?;
        let a = initial.a.get(m).copied().unwrap_or_else(T::zero);
        for (i, &t) in grid.iter().enumerate() {
            let j = control.convolve(&w, cr(-lam[m]), t);
            values[i].push(cr(a * (-lam[m] * t).exp()) - j);
        }
    }
    Ok(Trajectory { equation: Equation::Heat, times: grid.to_vec(), values, velocities: None, provenance: Provenance::Spectral })
}

/// Schrödinger equation: `c_k = a_k e^{iλ_k t} + i Σ_γ κ_k(γ) ∫_0^t e^{iλ_k(t−s)} f(γ, s) ds`.
pub fn schrodinger_forward<T: Real>(
    spectral: &SpectralData<T>,
    initial: &ModalState<T>,
    control: &BoundaryControl<T>,
    k: usize,
    grid: &[T],
) -> Result<Trajectory<T>, EvolutionError> {
    check_grid(grid)?;
    check_modes(spectral, k)?;
    let lam = spectral.eigenvalues();
    control.check_resolution(lam[k - 1])?;
    let i = c(T::zero(), T::one());
    let mut values = vec![Vec::with_capacity(k); grid.len()];
    for m in 0..k {
        let w = channel_weights(control, spectral, m, true)?;
        let a = initial.a.get(m).copied().unwrap_or_else(T::zero);
        for (n, &t) in grid.iter().enumerate() {
            let j = control.convolve(&w, c(T::zero(), lam[m]), t);
            values[n].push(cr(a) * cexp(c(T::zero(), lam[m] * t)) + i * j);
        }
    }
    Ok(Trajectory { equation: Equation::Schrodinger, times: grid.to_vec(), values, velocities: None, provenance: Provenance::Spectral })
}
