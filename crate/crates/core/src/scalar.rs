//! Scalar abstraction shared by every numerical module.
//!
//! All math in this crate is written against [`Real`], which bundles the
//! `nalgebra` field traits with the `num-traits` conversions. `f64` is the
//! production type; `f32` compiles and runs but cannot meet the tight
//! tolerances quoted in the tests.

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};

/// Real floating point scalar (`f32` or `f64`).
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + LowerExp + Debug + Default + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Converts a count into `Self`.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in scalar")
    }

    /// Lossy conversion to `f64`, used by the IO layer.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Complex number over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

/// `e^z` for complex `z`.
#[inline]
pub fn cexp<T: Real>(z: Cplx<T>) -> Cplx<T> {
    let (s, co) = z.im.sin_cos();
    let r = z.re.exp();
    Complex::new(r * co, r * s)
}

/// `|z|`.
#[inline]
pub fn cabs<T: Real>(z: Cplx<T>) -> T {
    z.re.hypot(z.im)
}

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> Cplx<T> {
    Complex::new(re, T::zero())
}

/// `sin(x)/x`, equal to 1 at the origin.
#[inline]
pub(crate) fn sinc<T: Real>(x: T) -> T {
    if x == T::zero() {
        T::one()
    } else {
        x.sin() / x
    }
}

/// `(e^x - 1)/x` for complex `x`, equal to 1 at the origin.
///
/// Accurate for small `|x|` (uses `expm1` on the real part and a half-angle
/// form on the imaginary part). Intended for `Re x <= 0`, where it never
/// overflows.
pub(crate) fn phi1<T: Real>(x: Cplx<T>) -> Cplx<T> {
    if x.re == T::zero() && x.im == T::zero() {
        return cr(T::one());
    }
    let half = T::lit(0.5);
    let (s, co) = x.im.sin_cos();
    let sh = (x.im * half).sin();
    let em1 = x.re.exp_m1();
    let re = em1 * co - T::lit(2.0) * sh * sh;
    let im = x.re.exp() * s;
    c(re, im) / x
}

/// `∫_{u0}^{u1} exp(c0 + w s) ds` evaluated without intermediate overflow.
pub(crate) fn exp_integral<T: Real>(c0: Cplx<T>, w: Cplx<T>, u0: T, u1: T) -> Cplx<T> {
    let len = u1 - u0;
    if len <= T::zero() {
        return cr(T::zero());
    }
    let lc = cr(len);
    if w.re >= T::zero() {
        cexp(c0 + w * cr(u1)) * lc * phi1(-w * lc)
    } else {
        cexp(c0 + w * cr(u0)) * lc * phi1(w * lc)
    }
}

/// `∫_{u0}^{u1} e^{w t} dt`; purely oscillatory `w` uses the symmetric
/// sinc form, so odd/even cancellations are exact.
pub(crate) fn window_integral<T: Real>(w: Cplx<T>, u0: T, u1: T) -> Cplx<T> {
    let len = u1 - u0;
    if w.re == T::zero() {
        let half = T::lit(0.5);
        let mid = (u0 + u1) * half;
        cexp(c(T::zero(), w.im * mid)) * (len * sinc(w.im * len * half))
    } else {
        exp_integral(cr(T::zero()), w, u0, u1)
    }
}

/// Error-free product `a·b = p + e`.
#[inline]
pub(crate) fn two_prod<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Error-free sum `a + b = s + e`.
#[inline]
pub(crate) fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Dot product in twice the working precision (Ogita–Rump–Oishi `Dot2`).
pub(crate) fn dot2<T: Real>(pairs: impl IntoIterator<Item = (T, T)>) -> T {
    let (mut s, mut comp) = (T::zero(), T::zero());
    for (a, b) in pairs {
        let (p, ep) = two_prod(a, b);
        let (t, es) = two_sum(s, p);
        s = t;
        comp += ep + es;
    }
    s + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot2_recovers_cancelled_terms() {
        let v = dot2([(1e16_f64, 1.0), (1.0, 1.0), (-1e16, 1.0)]);
        assert_eq!(v, 1.0);
        let w = window_integral(c(0.0_f64, 3.0), -2.0, 2.0);
        assert_eq!(w.im, 0.0);
        assert!((w.re - 2.0 * (6.0f64).sin() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn phi1_small_and_large() {
        let v = phi1(c(1e-12_f64, 0.0));
        assert!((v.re - 1.0).abs() < 1e-12);
        let x = c(-2.0_f64, 3.0);
        let direct = (cexp(x) - cr(1.0)) / x;
        assert!(cabs(phi1(x) - direct) < 1e-14);
    }

    #[test]
    fn exp_integral_matches_antiderivative() {
        let w = c(-0.3_f64, 2.0);
        let got = exp_integral(cr(0.0), w, 0.5, 2.0);
        let want = (cexp(w * cr(2.0)) - cexp(w * cr(0.5))) / w;
        assert!(cabs(got - want) < 1e-14);
        let big = exp_integral(cr(-400.0_f64), c(400.0, 0.0), 0.0, 1.0);
        assert!(big.re.is_finite());
        assert!((big.re - (1.0 - (-400.0f64).exp()) / 400.0).abs() < 1e-15);
    }

    #[test]
    fn pipeline_runs_in_single_precision() {
        use crate::control::Equation;
        use crate::families::ChannelSet;
        use crate::graph::{build_tree, DensityProfile, GraphSpec};
        use crate::spectral::{solve_spectrum, MeshConfig, ModalState};
        use crate::synthesis::{moment_residual, wave_control, ControlProblem};
        let tree = build_tree(GraphSpec::interval(std::f32::consts::PI, DensityProfile::Constant(1.0))).unwrap();
        let s = solve_spectrum(&tree, &MeshConfig::uniform(200), 3).unwrap();
        for (k, l) in s.eigenvalues().iter().enumerate() {
            assert!((l - ((k + 1) * (k + 1)) as f32).abs() < 1e-3 * l);
        }
        let st = ModalState::with_velocity(vec![1.0f32, 0.5, 0.0], vec![0.0, 0.0, 0.25]);
        let p = ControlProblem::new(Equation::Wave, &s, ChannelSet::Full, std::f32::consts::PI, st);
        let (f, _) = wave_control(&p).unwrap();
        let r = moment_residual(&f, &s, &p, 3).unwrap();
        assert!(r.iter().all(|z| z.norm() < 1e-4));
    }
}
