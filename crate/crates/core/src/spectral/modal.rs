//! Modal coefficient states and the `H_p` scale of norms.

use super::SpectralData;
use crate::scalar::{cabs, Cplx, Real};

/// Coefficients `a_k` (and optionally `b_k`) in the eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalState<T> {
    pub a: Vec<T>,
    pub b: Option<Vec<T>>,
}

impl<T: Real> ModalState<T> {
    pub fn new(a: Vec<T>) -> Self {
        Self { a, b: None }
    }

    pub fn with_velocity(a: Vec<T>, b: Vec<T>) -> Self {
        assert_eq!(a.len(), b.len());
        Self { a, b: Some(b) }
    }

    pub fn zeros(k: usize) -> Self {
        Self::new(vec![T::zero(); k])
    }

    /// `e_k` (0-based index).
    pub fn unit(len: usize, k: usize) -> Self {
        let mut a = vec![T::zero(); len];
        a[k] = T::one();
        Self::new(a)
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn velocity(&self) -> Vec<T> {
        self.b.clone().unwrap_or_else(|| vec![T::zero(); self.a.len()])
    }
}

/// `(Σ λ_k^p |c_k|²)^{1/2}` from squared magnitudes.
pub fn sequence_norm<T: Real>(squares: impl IntoIterator<Item = T>, eigenvalues: &[T], p: i32) -> T {
    squares
        .into_iter()
        .zip(eigenvalues)
        .fold(T::zero(), |acc, (s, &l)| acc + s * l.powi(p))
        .sqrt()
}

/// `‖a‖_p` of the position coefficients.
pub fn modal_norm<T: Real>(state: &ModalState<T>, spectral: &SpectralData<T>, p: i32) -> T {
    assert!(state.len() <= spectral.mode_count(), "state has more modes than the spectral data");
    sequence_norm(state.a.iter().map(|&x| x * x), spectral.eigenvalues(), p)
}

pub fn complex_norm<T: Real>(c: &[Cplx<T>], eigenvalues: &[T], p: i32) -> T {
    sequence_norm(c.iter().map(|&z| {
        let r = cabs(z);
        r * r
    }), eigenvalues, p)
}

/// Norm on `H × H_{-1}`: `(Σ a_k² + Σ b_k²/λ_k)^{1/2}`.
pub fn wave_norm<T: Real>(a: &[T], b: &[T], eigenvalues: &[T]) -> T {
    let pa = sequence_norm(a.iter().map(|&x| x * x), eigenvalues, 0);
    let pb = sequence_norm(b.iter().map(|&x| x * x), eigenvalues, -1);
    (pa * pa + pb * pb).sqrt()
}
