//! Boundary controls: time functions on `[0, T]` with one channel per
//! controlled boundary vertex.
//!
//! A control is stored either as a finite sum of exponential atoms
//! `c · v · e^{z (s − s0)}` on a window, which keeps every convolution in
//! closed form, or as uniform samples with linear interpolation.

use crate::scalar::{cabs, cexp, cr, exp_integral, Cplx, Real};
use crate::spectral::gauss4;
use thiserror::Error;

/// Which evolution equation a control drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Equation {
    Wave,
    Heat,
    Schrodinger,
}

impl Equation {
    pub fn name(self) -> &'static str {
        match self {
            Equation::Wave => "wave",
            Equation::Heat => "heat",
            Equation::Schrodinger => "schrodinger",
        }
    }
}

impl std::str::FromStr for Equation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "wave" => Ok(Equation::Wave),
            "heat" => Ok(Equation::Heat),
            "schrodinger" => Ok(Equation::Schrodinger),
            _ => Err(format!("unknown equation `{s}`")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("control sampling too coarse: {points_per_period:.2} samples per shortest period, need 8")]
    UnderresolvedQuadrature { points_per_period: f64 },
    #[error("inconsistent channels: {0}")]
    InconsistentChannels(String),
    #[error("invalid control: {0}")]
    Invalid(String),
}

/// `coeff · profile · e^{rate (s − anchor)}` for `s` in `window`, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpAtom<T> {
    pub coeff: Cplx<T>,
    /// One weight per active channel.
    pub profile: Vec<T>,
    pub rate: Cplx<T>,
    pub anchor: T,
    pub window: (T, T),
}

/// Uniform samples `values[i]` at `t = i · dt`, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledControl<T> {
    pub dt: T,
    /// Per sample, one value per active channel.
    pub values: Vec<Vec<Cplx<T>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlRepr<T> {
    Atoms(Vec<ExpAtom<T>>),
    Sampled(SampledControl<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryControl<T> {
    boundary_ids: Vec<usize>,
    channel_ids: Vec<usize>,
    horizon: T,
    real: bool,
    repr: ControlRepr<T>,
}

impl<T: Real> BoundaryControl<T> {
    fn checked(boundary_ids: Vec<usize>, channel_ids: Vec<usize>, horizon: T, real: bool, repr: ControlRepr<T>) -> Result<Self, ControlError> {
        if !(horizon > T::zero()) {
            return Err(ControlError::Invalid("horizon must be positive".into()));
        }
        if channel_ids.is_empty() || channel_ids.iter().any(|c| !boundary_ids.contains(c)) {
            return Err(ControlError::InconsistentChannels(format!("channels {channel_ids:?} not within boundary {boundary_ids:?}")));
        }
        let m = channel_ids.len();
        let ok = match &repr {
            ControlRepr::Atoms(a) => a.iter().all(|x| x.profile.len() == m),
            ControlRepr::Sampled(s) => s.dt > T::zero() && s.values.len() >= 2 && s.values.iter().all(|v| v.len() == m),
        };
        if !ok {
            return Err(ControlError::InconsistentChannels(format!("representation does not match {m} channels")));
        }
        Ok(Self { boundary_ids, channel_ids, horizon, real, repr })
    }

    pub fn from_atoms(boundary_ids: Vec<usize>, channel_ids: Vec<usize>, horizon: T, real: bool, atoms: Vec<ExpAtom<T>>) -> Result<Self, ControlError> {
        Self::checked(boundary_ids, channel_ids, horizon, real, ControlRepr::Atoms(atoms))
    }

    pub fn from_samples(
        boundary_ids: Vec<usize>,
        channel_ids: Vec<usize>,
        horizon: T,
        real: bool,
        samples: SampledControl<T>,
    ) -> Result<Self, ControlError> {
        Self::checked(boundary_ids, channel_ids, horizon, real, ControlRepr::Sampled(samples))
    }

    /// The zero control.
    pub fn zero(boundary_ids: Vec<usize>, channel_ids: Vec<usize>, horizon: T, real: bool) -> Result<Self, ControlError> {
        Self::from_atoms(boundary_ids, channel_ids, horizon, real, Vec::new())
    }

    pub fn boundary_ids(&self) -> &[usize] {
        &self.boundary_ids
    }

    /// Boundary vertex id of each channel.
    pub fn channel_ids(&self) -> &[usize] {
        &self.channel_ids
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn repr(&self) -> &ControlRepr<T> {
        &self.repr
    }

    pub fn atoms(&self) -> Option<&[ExpAtom<T>]> {
        match &self.repr {
            ControlRepr::Atoms(a) => Some(a),
            ControlRepr::Sampled(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            ControlRepr::Atoms(a) => a.iter().all(|x| x.coeff == cr(T::zero()) || x.profile.iter().all(|&p| p == T::zero())),
            ControlRepr::Sampled(s) => s.values.iter().flatten().all(|&v| v == cr(T::zero())),
        }
    }

    /// Channel values at time `s`.
    pub fn eval(&self, s: T) -> Vec<Cplx<T>> {
        let m = self.channel_ids.len();
        let mut out = vec![cr(T::zero()); m];
        match &self.repr {
            ControlRepr::Atoms(atoms) => {
                for a in atoms {
                    if s >= a.window.0 && s <= a.window.1 {
                        let e = a.coeff * cexp(a.rate * cr(s - a.anchor));
                        for (o, &p) in out.iter_mut().zip(&a.profile) {
                            *o += e * cr(p);
                        }
                    }
                }
            }
            ControlRepr::Sampled(smp) => {
                let (i, w) = smp.locate(s);
                if let Some(i) = i {
                    for (ch, o) in out.iter_mut().enumerate() {
                        *o = smp.values[i][ch] * cr(T::one() - w) + smp.values[i + 1][ch] * cr(w);
                    }
                }
            }
        }
        if self.real {
            for o in &mut out {
                o.im = T::zero();
            }
        }
        out
    }

    /// Real parts of [`eval`](Self::eval).
    pub fn eval_real(&self, s: T) -> Vec<T> {
        self.eval(s).into_iter().map(|z| z.re).collect()
    }

    /// Values on every boundary vertex, zero on uncontrolled ones.
    pub fn eval_boundary(&self, s: T) -> Vec<Cplx<T>> {
        let v = self.eval(s);
        self.boundary_ids
            .iter()
            .map(|b| self.channel_ids.iter().position(|c| c == b).map_or(cr(T::zero()), |i| v[i]))
            .collect()
    }

    /// Time derivative at `s` (exact for atoms, the slope of the linear
    /// piece for samples).
    pub fn derivative(&self, s: T) -> Vec<Cplx<T>> {
        let m = self.channel_ids.len();
        let mut out = vec![cr(T::zero()); m];
        match &self.repr {
            ControlRepr::Atoms(atoms) => {
                for a in atoms {
                    if s >= a.window.0 && s <= a.window.1 {
                        let e = a.coeff * a.rate * cexp(a.rate * cr(s - a.anchor));
                        for (o, &p) in out.iter_mut().zip(&a.profile) {
                            *o += e * cr(p);
                        }
                    }
                }
            }
            ControlRepr::Sampled(smp) => {
                if let (Some(i), _) = smp.locate(s) {
                    for (ch, o) in out.iter_mut().enumerate() {
                        *o = (smp.values[i + 1][ch] - smp.values[i][ch]) / cr(smp.dt);
                    }
                }
            }
        }
        if self.real {
            for o in &mut out {
                o.im = T::zero();
            }
        }
        out
    }

    /// `‖f‖_{L_2([0,T]; C^m)}`, in closed form for both representations.
    pub fn l2_norm(&self) -> T {
        match &self.repr {
            ControlRepr::Atoms(atoms) => {
                let mut acc = cr(T::zero());
                for a in atoms {
                    for b in atoms {
                        let lo = a.window.0.max(b.window.0).max(T::zero());
                        let hi = a.window.1.min(b.window.1).min(self.horizon);
                        if hi <= lo {
                            continue;
                        }
                        let dot = a.profile.iter().zip(&b.profile).fold(T::zero(), |s, (&x, &y)| s + x * y);
                        let w = a.rate + b.rate.conj();
                        let c0 = -(a.rate * cr(a.anchor)) - b.rate.conj() * cr(b.anchor);
                        acc += a.coeff * b.coeff.conj() * cr(dot) * exp_integral(c0, w, lo, hi);
                    }
                }
                if self.real {
                    // For a real control the atoms pair up; the sum is real.
                    acc.re.max(T::zero()).sqrt()
                } else {
                    cabs(acc).sqrt()
                }
            }
            ControlRepr::Sampled(smp) => {
                let mut acc = T::zero();
                let third = T::one() / T::lit(3.0);
                for (i, w) in smp.values.windows(2).enumerate() {
                    let t0 = smp.dt * T::from_count(i);
                    if t0 >= self.horizon {
                        break;
                    }
                    let h = (self.horizon - t0).min(smp.dt);
                    for ch in 0..w[0].len() {
                        let (a, b) = (w[0][ch], w[1][ch]);
                        let (a, b) = if self.real { (cr(a.re), cr(b.re)) } else { (a, b) };
                        let cross = (a * b.conj()).re;
                        acc += h * third * (a.norm_sqr() + cross + b.norm_sqr());
                    }
                }
                acc.sqrt()
            }
        }
    }

    /// The same control switched off after `t_end`. Exact for atoms; for
    /// samples the values beyond `t_end` are zeroed.
    pub fn restricted(&self, t_end: T) -> Self {
        let mut out = self.clone();
        match &mut out.repr {
            ControlRepr::Atoms(atoms) => {
                for a in atoms {
                    a.window.1 = a.window.1.min(t_end);
                }
            }
            ControlRepr::Sampled(smp) => {
                let dt = smp.dt;
                for (i, v) in smp.values.iter_mut().enumerate() {
                    if dt * T::from_count(i) > t_end {
                        v.iter_mut().for_each(|x| *x = cr(T::zero()));
                    }
                }
            }
        }
        out
    }

    /// Sum of two atom controls on the same channels.
    pub fn plus(&self, other: &Self) -> Result<Self, ControlError> {
        match (&self.repr, &other.repr) {
            (ControlRepr::Atoms(a), ControlRepr::Atoms(b)) if self.channel_ids == other.channel_ids => {
                let atoms = a.iter().chain(b.iter()).cloned().collect();
                Self::from_atoms(self.boundary_ids.clone(), self.channel_ids.clone(), self.horizon.max(other.horizon), self.real && other.real, atoms)
            }
            _ => Err(ControlError::InconsistentChannels("sum needs atom controls on the same channels".into())),
        }
    }

    /// `count + 1` uniform samples on `[0, T]`.
    pub fn to_sampled(&self, count: usize) -> Self {
        let count = count.max(1);
        let dt = self.horizon / T::from_count(count);
        let values = (0..=count).map(|i| self.eval(dt * T::from_count(i))).collect();
        let repr = ControlRepr::Sampled(SampledControl { dt, values });
        Self { repr, ..self.clone() }
    }

    /// Checks that samples resolve a kernel `e^{μ t}` with `|μ| ≤ max_rate`.
    pub fn check_resolution(&self, max_rate: T) -> Result<(), ControlError> {
        if let ControlRepr::Sampled(smp) = &self.repr {
            if max_rate > T::zero() {
                let per_period = T::two_pi() / (max_rate * smp.dt);
                if per_period < T::lit(8.0) {
                    return Err(ControlError::UnderresolvedQuadrature { points_per_period: per_period.to_f64_lossy() });
                }
            }
        }
        Ok(())
    }

    /// `Σ_ch w_ch ∫_0^t e^{μ (t − s)} f_ch(s) ds`. Atoms of a real control
    /// must come in conjugate pairs.
    pub fn convolve(&self, weights: &[T], mu: Cplx<T>, t: T) -> Cplx<T> {
        let upper = t.min(self.horizon);
        let mut acc = cr(T::zero());
        if upper <= T::zero() {
            return acc;
        }
        match &self.repr {
            ControlRepr::Atoms(atoms) => {
                for a in atoms {
                    let lo = a.window.0.max(T::zero());
                    let hi = a.window.1.min(upper);
                    if hi <= lo {
                        continue;
                    }
                    let w = a.profile.iter().zip(weights).fold(T::zero(), |s, (&p, &q)| s + p * q);
                    if w == T::zero() {
                        continue;
                    }
                    let c0 = mu * cr(t) - a.rate * cr(a.anchor);
                    acc += a.coeff * cr(w) * exp_integral(c0, a.rate - mu, lo, hi);
                }
            }
            ControlRepr::Sampled(smp) => {
                let n = smp.values.len() - 1;
                for i in 0..n {
                    let a = smp.dt * T::from_count(i);
                    if a >= upper {
                        break;
                    }
                    let b = (a + smp.dt).min(upper);
                    for (s, wq) in gauss4(a, b) {
                        let u = (s - a) / smp.dt;
                        let kern = cexp(mu * cr(t - s)) * cr(wq);
                        for (ch, &wc) in weights.iter().enumerate() {
                            let mut v = smp.values[i][ch] * cr(T::one() - u) + smp.values[i + 1][ch] * cr(u);
                            if self.real {
                                v.im = T::zero();
                            }
                            acc += kern * v * cr(wc);
                        }
                    }
                }
            }
        }
        acc
    }

}

impl<T: Real> SampledControl<T> {
    /// Interval index and interpolation weight for time `s`.
    fn locate(&self, s: T) -> (Option<usize>, T) {
        let n = self.values.len() - 1;
        if s < T::zero() {
            return (None, T::zero());
        }
        let x = s / self.dt;
        let i = x.floor().to_f64_lossy() as usize;
        if i >= n {
            let end = self.dt * T::from_count(n);
            return if s <= end + self.dt * T::lit(1e-9) { (Some(n - 1), T::one()) } else { (None, T::zero()) };
        }
        (Some(i), x - T::from_count(i))
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.values.len()).map(|i| self.dt * T::from_count(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn sine_control() -> BoundaryControl<f64> {
        // sin(s) on channel 0 as two atoms.
        let atoms = vec![
            ExpAtom { coeff: c(0.0, -0.5), profile: vec![1.0, 0.0], rate: c(0.0, 1.0), anchor: 0.0, window: (0.0, 10.0) },
            ExpAtom { coeff: c(0.0, 0.5), profile: vec![1.0, 0.0], rate: c(0.0, -1.0), anchor: 0.0, window: (0.0, 10.0) },
        ];
        BoundaryControl::from_atoms(vec![0, 1], vec![0, 1], 10.0, true, atoms).unwrap()
    }

    #[test]
    fn atoms_evaluate_and_convolve() {
        let f = sine_control();
        assert!((f.eval_real(1.1)[0] - 1.1f64.sin()).abs() < 1e-15);
        assert_eq!(f.eval_real(1.1)[1], 0.0);
        // ∫_0^t sin(t − s) sin(s) ds = (sin t − t cos t)/2
        let t = 2.3f64;
        let jp = f.convolve(&[1.0, 0.0], c(0.0, 1.0), t);
        let jm = f.convolve(&[1.0, 0.0], c(0.0, -1.0), t);
        let conv = (jp - jm) / c(0.0, 2.0);
        assert!((conv.re - (t.sin() - t * t.cos()) / 2.0).abs() < 1e-14);
        // ‖sin‖² on [0, 10]
        let want = 5.0 - (20.0f64).sin() / 4.0;
        assert!((f.l2_norm() - want.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn samples_agree_with_atoms() {
        let f = sine_control();
        let g = f.to_sampled(4000);
        let t = 3.7;
        let a = f.convolve(&[1.0, 0.0], c(-2.0, 0.0), t);
        let b = g.convolve(&[1.0, 0.0], c(-2.0, 0.0), t);
        assert!(cabs(a - b) < 1e-6);
        assert!((f.l2_norm() - g.l2_norm()).abs() < 1e-5);
        assert!(g.check_resolution(1.0).is_ok());
        assert!(matches!(f.to_sampled(10).check_resolution(1.0), Err(ControlError::UnderresolvedQuadrature { .. })));
    }

    #[test]
    fn restriction_is_causal() {
        let f = sine_control();
        let r = f.restricted(1.0);
        let t = 2.0;
        let full = f.convolve(&[1.0, 0.0], c(0.0, 3.0), 1.0);
        let cut = r.convolve(&[1.0, 0.0], c(0.0, 3.0), 1.0);
        assert_eq!(full, cut);
        assert_eq!(r.eval_real(t)[0], 0.0);
    }
}
