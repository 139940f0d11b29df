//! Vector exponential families `α_k · s_k(t)` and their Gram matrices.
//!
//! Every member is a channel vector (a row of α, or of α restricted to a
//! channel subset) times a scalar time factor that is a short sum of complex
//! exponentials. Gram entries are integrated in closed form from that
//! representation.

mod biorth;
mod checks;
mod gram;

pub use biorth::{biorth_growth_fit, biorthogonal, biorthogonal_complex, Biorthogonal, GrowthFit};
pub use checks::{extension_orthogonality, shift_defect};
pub use gram::{complex_gram, gram, real_gram, sigma_min, Gram, GramMatrix, GramScalar, GramSolve};

use crate::scalar::{c, cexp, cr, Cplx, Real};
use crate::spectral::SpectralData;
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// `α_k sin(ω_k t)`.
    Sin,
    /// `α_k cos(ω_k t)`.
    Cos,
    /// Sine members followed by cosine members (2K in total).
    SinCos,
    /// `α_k e^{iω_k t}`.
    ExpPlus,
    /// `α_k e^{-iω_k t}`.
    ExpMinus,
    /// `E_{+k}` members followed by `E_{-k}` members (2K in total).
    ExpPm,
    /// `α_k e^{-λ_k t}`.
    Parabolic,
    /// `α_k e^{iλ_k t}`.
    Schrodinger,
}

impl FamilyKind {
    pub fn is_real(self) -> bool {
        matches!(self, FamilyKind::Sin | FamilyKind::Cos | FamilyKind::SinCos | FamilyKind::Parabolic)
    }

    fn blocks(self) -> usize {
        match self {
            FamilyKind::SinCos | FamilyKind::ExpPm => 2,
            _ => 1,
        }
    }
}

/// Boundary vertices that carry a control channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSet {
    Full,
    /// Every boundary vertex except this one (vertex id).
    AllBut(usize),
}

impl ChannelSet {
    /// Column indices into the boundary ordering.
    pub fn columns(&self, boundary_ids: &[usize]) -> Result<Vec<usize>, FamilyError> {
        match *self {
            ChannelSet::Full => Ok((0..boundary_ids.len()).collect()),
            ChannelSet::AllBut(v) => {
                let pos = boundary_ids
                    .iter()
                    .position(|&b| b == v)
                    .ok_or_else(|| FamilyError::InconsistentChannels(format!("vertex {v} is not a boundary vertex")))?;
                if boundary_ids.len() < 2 {
                    return Err(FamilyError::InconsistentChannels("no channel left".into()));
                }
                Ok((0..boundary_ids.len()).filter(|&i| i != pos).collect())
            }
        }
    }

    pub fn excluded(&self) -> Option<usize> {
        match *self {
            ChannelSet::Full => None,
            ChannelSet::AllBut(v) => Some(v),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("index {index} out of range for {len} members")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("inconsistent channels: {0}")]
    InconsistentChannels(String),
    #[error("horizon must be positive")]
    InvalidHorizon,
    #[error("eigenvalues must be positive and match the amplitude rows")]
    InvalidRates,
    #[error("family kind {0:?} is complex-valued")]
    NotReal(FamilyKind),
    #[error("family kind {0:?} not supported here")]
    UnsupportedKind(FamilyKind),
}

/// A vector exponential family on `[0, T]`.
#[derive(Debug, Clone)]
pub struct FamilySpec<T> {
    kind: FamilyKind,
    eigenvalues: Vec<T>,
    amplitudes: DMatrix<T>,
    channel_ids: Vec<usize>,
    horizon: T,
}

/// Scalar time factor `Σ coef · e^{rate·t}` (at most two terms).
pub(crate) type Terms<T> = ([(Cplx<T>, Cplx<T>); 2], usize);

impl<T: Real> FamilySpec<T> {
    /// `amplitudes` is modes × channels; `channel_ids` names the channels.
    pub fn new(
        kind: FamilyKind,
        eigenvalues: Vec<T>,
        amplitudes: DMatrix<T>,
        channel_ids: Vec<usize>,
        horizon: T,
    ) -> Result<Self, FamilyError> {
        if !(horizon > T::zero()) {
            return Err(FamilyError::InvalidHorizon);
        }
        if eigenvalues.len() != amplitudes.nrows() || eigenvalues.iter().any(|&l| !(l > T::zero())) {
            return Err(FamilyError::InvalidRates);
        }
        if channel_ids.len() != amplitudes.ncols() || channel_ids.is_empty() {
            return Err(FamilyError::InconsistentChannels(format!(
                "{} channel ids for {} amplitude columns",
                channel_ids.len(),
                amplitudes.ncols()
            )));
        }
        Ok(Self { kind, eigenvalues, amplitudes, channel_ids, horizon })
    }

    /// First `k` modes of `spectral`, restricted to `channels`.
    pub fn from_spectral(
        kind: FamilyKind,
        spectral: &SpectralData<T>,
        channels: ChannelSet,
        k: usize,
        horizon: T,
    ) -> Result<Self, FamilyError> {
        if k == 0 || k > spectral.mode_count() {
            return Err(FamilyError::IndexOutOfRange { index: k, len: spectral.mode_count() });
        }
        let cols = channels.columns(spectral.boundary_ids())?;
        let amplitudes = DMatrix::from_fn(k, cols.len(), |r, j| spectral.alpha()[(r, cols[j])]);
        let ids = cols.iter().map(|&j| spectral.boundary_ids()[j]).collect();
        Self::new(kind, spectral.eigenvalues()[..k].to_vec(), amplitudes, ids, horizon)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn member_count(&self) -> usize {
        self.kind.blocks() * self.mode_count()
    }

    pub fn channel_ids(&self) -> &[usize] {
        &self.channel_ids
    }

    pub fn amplitudes(&self) -> &DMatrix<T> {
        &self.amplitudes
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn with_horizon(&self, horizon: T) -> Result<Self, FamilyError> {
        Self::new(self.kind, self.eigenvalues.clone(), self.amplitudes.clone(), self.channel_ids.clone(), horizon)
    }

    /// `√λ_k` for the oscillatory kinds, `λ_k` for the parabolic and
    /// Schrödinger kinds.
    pub fn rate(&self, k: usize) -> T {
        match self.kind {
            FamilyKind::Parabolic | FamilyKind::Schrodinger => self.eigenvalues[k],
            _ => self.eigenvalues[k].sqrt(),
        }
    }

    /// Mode index of member `j`.
    pub fn member_mode(&self, j: usize) -> usize {
        j % self.mode_count()
    }

    pub(crate) fn terms(&self, j: usize) -> Terms<T> {
        let k = self.member_mode(j);
        let second = j >= self.mode_count();
        let w = self.rate(k);
        let zero = cr(T::zero());
        let half = T::lit(0.5);
        let iw = c(T::zero(), w);
        let sin = ([(c(T::zero(), -half), iw), (c(T::zero(), half), -iw)], 2);
        let cos = ([(cr(half), iw), (cr(half), -iw)], 2);
        match self.kind {
            FamilyKind::Sin => sin,
            FamilyKind::Cos => cos,
            FamilyKind::SinCos => {
                if second {
                    cos
                } else {
                    sin
                }
            }
            FamilyKind::ExpPlus => ([(cr(T::one()), iw), (zero, zero)], 1),
            FamilyKind::ExpMinus => ([(cr(T::one()), -iw), (zero, zero)], 1),
            FamilyKind::ExpPm => ([(cr(T::one()), if second { -iw } else { iw }), (zero, zero)], 1),
            FamilyKind::Parabolic => ([(cr(T::one()), cr(-w)), (zero, zero)], 1),
            FamilyKind::Schrodinger => ([(cr(T::one()), iw), (zero, zero)], 1),
        }
    }

    /// Scalar time factor of member `j` at `t`.
    pub fn time_factor(&self, j: usize, t: T) -> Cplx<T> {
        let k = self.member_mode(j);
        let w = self.rate(k);
        let second = j >= self.mode_count();
        match self.kind {
            FamilyKind::Sin => cr((w * t).sin()),
            FamilyKind::Cos => cr((w * t).cos()),
            FamilyKind::SinCos => cr(if second { (w * t).cos() } else { (w * t).sin() }),
            FamilyKind::Parabolic => cr((-w * t).exp()),
            _ => {
                let (terms, _) = self.terms(j);
                terms[0].0 * cexp(terms[0].1 * cr(t))
            }
        }
    }

    /// Channel vector of member `j` at time `t`.
    pub fn eval_member(&self, j: usize, t: T) -> Result<Vec<Cplx<T>>, FamilyError> {
        if j >= self.member_count() {
            return Err(FamilyError::IndexOutOfRange { index: j, len: self.member_count() });
        }
        let s = self.time_factor(j, t);
        let k = self.member_mode(j);
        Ok(self.amplitudes.row(k).iter().map(|&a| s * cr(a)).collect())
    }

    /// Real channel vector of member `j` at time `t`.
    pub fn eval_member_real(&self, j: usize, t: T) -> Result<Vec<T>, FamilyError> {
        if !self.kind.is_real() {
            return Err(FamilyError::NotReal(self.kind));
        }
        Ok(self.eval_member(j, t)?.into_iter().map(|z| z.re).collect())
    }

    /// `α_j · α_k` over the family's channels, for members `j`, `k`.
    pub fn amplitude_dot(&self, j: usize, k: usize) -> T {
        let (a, b) = (self.member_mode(j), self.member_mode(k));
        self.amplitudes.row(a).iter().zip(self.amplitudes.row(b).iter()).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
    }
}
