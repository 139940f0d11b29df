//! Per-edge density profiles and their optical integrals.

use crate::scalar::Real;

/// Mass-per-length density along one edge, parametrized by the local
/// coordinate `x ∈ [0, ℓ]` measured from the tail vertex.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityProfile<T> {
    /// `ρ(x) = c`.
    Constant(T),
    /// `ρ(x) = p + q x`.
    Linear { p: T, q: T },
    /// Equally spaced samples on `[0, ℓ]` (first at the tail, last at the
    /// head), interpolated by a monotone cubic.
    Sampled(Vec<T>),
}

impl<T: Real> DensityProfile<T> {
    /// Smallest value taken on `[0, length]`.
    ///
    /// Exact for every variant: the monotone cubic never leaves the range
    /// spanned by neighbouring samples.
    pub fn min_on(&self, length: T) -> T {
        match self {
            Self::Constant(c) => *c,
            Self::Linear { p, q } => p.min(*p + *q * length),
            Self::Sampled(v) => v.iter().copied().fold(T::max_value().unwrap(), |a, b| a.min(b)),
        }
    }

    pub fn max_on(&self, length: T) -> T {
        match self {
            Self::Constant(c) => *c,
            Self::Linear { p, q } => p.max(*p + *q * length),
            Self::Sampled(v) => v.iter().copied().fold(T::min_value().unwrap(), |a, b| a.max(b)),
        }
    }

    /// Scales the density by `s`.
    pub fn scaled(&self, s: T) -> Self {
        match self {
            Self::Constant(c) => Self::Constant(*c * s),
            Self::Linear { p, q } => Self::Linear { p: *p * s, q: *q * s },
            Self::Sampled(v) => Self::Sampled(v.iter().map(|&x| x * s).collect()),
        }
    }

    /// Bound to an edge of the given length, ready for evaluation.
    pub fn on_edge(&self, length: T) -> EdgeDensity<T> {
        let cubic = match self {
            Self::Sampled(v) => Some(MonotoneCubic::new(v, length)),
            _ => None,
        };
        EdgeDensity { profile: self.clone(), length, cubic }
    }
}

/// A density profile attached to an edge of known length.
#[derive(Debug, Clone)]
pub struct EdgeDensity<T> {
    profile: DensityProfile<T>,
    length: T,
    cubic: Option<MonotoneCubic<T>>,
}

impl<T: Real> EdgeDensity<T> {
    pub fn profile(&self) -> &DensityProfile<T> {
        &self.profile
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn eval(&self, x: T) -> T {
        match &self.profile {
            DensityProfile::Constant(c) => *c,
            DensityProfile::Linear { p, q } => *p + *q * x,
            DensityProfile::Sampled(_) => self.cubic.as_ref().unwrap().eval(x),
        }
    }

    /// Optical length `∫_a^b √ρ dx` for `0 <= a <= b <= ℓ`.
    pub fn optical(&self, a: T, b: T) -> T {
        if b <= a {
            return T::zero();
        }
        match &self.profile {
            DensityProfile::Constant(c) => c.sqrt() * (b - a),
            DensityProfile::Linear { p, q } => {
                let ra = *p + *q * a;
                let rb = *p + *q * b;
                // Avoid the 1/q form when the slope is negligible.
                if (*q * (b - a)).abs() <= T::lit(1e-6) * ra.abs() {
                    let mid = (ra + rb) * T::lit(0.5);
                    let d = (rb - ra) / mid;
                    // √(mid(1+u)) averaged over u ∈ [-d/2, d/2]
                    mid.sqrt() * (b - a) * (T::one() - d * d / T::lit(96.0))
                } else {
                    T::lit(2.0) / (T::lit(3.0) * *q) * (rb * rb.sqrt() - ra * ra.sqrt())
                }
            }
            DensityProfile::Sampled(_) => {
                let cubic = self.cubic.as_ref().unwrap();
                let knots = cubic.knots_between(a, b);
                let mut total = T::zero();
                for w in knots.windows(2) {
                    total += adaptive_simpson(&|x| cubic.eval(x).sqrt(), w[0], w[1], T::lit(1e-12));
                }
                total
            }
        }
    }

    /// Local coordinate `x` with `optical(0, x) = s`, for `0 <= s <= optical(0, ℓ)`.
    pub fn invert_optical(&self, s: T) -> T {
        let total = self.optical(T::zero(), self.length);
        if s <= T::zero() {
            return T::zero();
        }
        if s >= total {
            return self.length;
        }
        if let DensityProfile::Constant(c) = &self.profile {
            return s / c.sqrt();
        }
        // Safeguarded Newton on the increasing map x ↦ σ(x).
        let (mut lo, mut hi) = (T::zero(), self.length);
        let mut x = self.length * s / total;
        for _ in 0..200 {
            let g = self.optical(T::zero(), x) - s;
            if g.abs() <= T::lit(1e-14) * total {
                break;
            }
            if g > T::zero() {
                hi = x;
            } else {
                lo = x;
            }
            let mut next = x - g / self.eval(x).sqrt();
            if !(next > lo && next < hi) {
                next = (lo + hi) * T::lit(0.5);
            }
            if (next - x).abs() <= T::eps() * self.length {
                x = next;
                break;
            }
            x = next;
        }
        x
    }
}

/// Fritsch–Carlson monotone piecewise cubic through equally spaced samples.
#[derive(Debug, Clone)]
pub struct MonotoneCubic<T> {
    values: Vec<T>,
    slopes: Vec<T>,
    step: T,
}

impl<T: Real> MonotoneCubic<T> {
    pub fn new(values: &[T], length: T) -> Self {
        let n = values.len();
        assert!(n >= 2, "sampled density needs at least two samples");
        let step = length / T::from_count(n - 1);
        let secants: Vec<T> = values.windows(2).map(|w| (w[1] - w[0]) / step).collect();
        let mut slopes = vec![T::zero(); n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (a, b) = (secants[i - 1], secants[i]);
            slopes[i] = if a * b <= T::zero() {
                T::zero()
            } else {
                // Weighted harmonic mean (equal spacing).
                T::lit(2.0) * a * b / (a + b)
            };
        }
        for i in 0..n - 1 {
            let d = secants[i];
            if d == T::zero() {
                slopes[i] = T::zero();
                slopes[i + 1] = T::zero();
                continue;
            }
            let a = slopes[i] / d;
            let b = slopes[i + 1] / d;
            let r = a * a + b * b;
            if r > T::lit(9.0) {
                let t = T::lit(3.0) / r.sqrt();
                slopes[i] = t * a * d;
                slopes[i + 1] = t * b * d;
            }
        }
        Self { values: values.to_vec(), slopes, step }
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.values.len();
        let u = (x / self.step).max(T::zero());
        let mut i = u.floor().to_usize().unwrap_or(0);
        if i >= n - 1 {
            i = n - 2;
        }
        let t = u - T::from_count(i);
        let h = self.step;
        let (t2, t3) = (t * t, t * t * t);
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        h00 * self.values[i] + h10 * h * self.slopes[i] + h01 * self.values[i + 1] + h11 * h * self.slopes[i + 1]
    }

    fn knots_between(&self, a: T, b: T) -> Vec<T> {
        let mut out = vec![a];
        let first = (a / self.step).floor().to_usize().unwrap_or(0) + 1;
        let mut k = first;
        loop {
            let x = T::from_count(k) * self.step;
            if x >= b {
                break;
            }
            if x > a {
                out.push(x);
            }
            k += 1;
        }
        out.push(b);
        out
    }
}

/// Adaptive Simpson quadrature with a relative tolerance.
pub(crate) fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, rel_tol: T) -> T {
    let m = (a + b) * T::lit(0.5);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    let tol = rel_tol * whole.abs().max(T::eps());
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> T {
    let m = (a + b) * T::lit(0.5);
    let lm = (a + m) * T::lit(0.5);
    let rm = (m + b) * T::lit(0.5);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / T::lit(6.0) * (fa + T::lit(4.0) * flm + fm);
    let right = (b - m) / T::lit(6.0) * (fm + T::lit(4.0) * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol || (b - a) <= T::eps() * a.abs().max(T::one()) * T::lit(8.0) {
        return left + right + delta / T::lit(15.0);
    }
    let half = tol * T::lit(0.5);
    simpson_step(f, a, m, fa, flm, fm, left, half, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, half, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_profile_optical_closed_form() {
        let d = DensityProfile::Linear { p: 1.0_f64, q: 3.0 }.on_edge(1.0);
        // ∫_0^1 √(1+3x) dx = (2/9)(8 - 1)
        assert!((d.optical(0.0, 1.0) - 14.0 / 9.0).abs() < 1e-14);
        let flat = DensityProfile::Linear { p: 4.0_f64, q: 1e-12 }.on_edge(2.0);
        assert!((flat.optical(0.0, 2.0) - 4.0).abs() < 1e-11);
    }

    #[test]
    fn sampled_profile_reproduces_constant_and_is_monotone() {
        let d = DensityProfile::Sampled(vec![4.0_f64; 5]).on_edge(2.0);
        assert!((d.optical(0.0, 2.0) - 4.0).abs() < 1e-12);
        let m = MonotoneCubic::new(&[1.0_f64, 2.0, 2.0, 5.0], 3.0);
        let mut prev = m.eval(0.0);
        for i in 1..=300 {
            let v = m.eval(3.0 * i as f64 / 300.0);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn invert_optical_roundtrip() {
        for prof in [
            DensityProfile::Constant(2.0_f64),
            DensityProfile::Linear { p: 1.0, q: 0.5 },
            DensityProfile::Sampled(vec![1.0, 3.0, 2.0, 4.0]),
        ] {
            let d = prof.on_edge(1.5);
            let total = d.optical(0.0, 1.5);
            for s in [0.1, 0.37, 0.9] {
                let x = d.invert_optical(s * total);
                assert!((d.optical(0.0, x) - s * total).abs() < 1e-11 * total);
            }
        }
    }
}
