//! Closed-form Gram matrices and their regularized solves.

use super::{FamilyError, FamilySpec};
use crate::scalar::{cabs, cr, dot2, two_sum, window_integral, Cplx, Real};
use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};

/// Scalar type of a Gram matrix: `T` for real families, `Cplx<T>` otherwise.
pub trait GramScalar<T: Real>: ComplexField<RealField = T> + Copy {
    fn from_cplx(z: Cplx<T>) -> Self;
    fn to_cplx(self) -> Cplx<T>;
}

impl<T: Real> GramScalar<T> for T {
    fn from_cplx(z: Cplx<T>) -> Self {
        z.re
    }
    fn to_cplx(self) -> Cplx<T> {
        cr(self)
    }
}

impl<T: Real> GramScalar<T> for Cplx<T> {
    fn from_cplx(z: Cplx<T>) -> Self {
        z
    }
    fn to_cplx(self) -> Cplx<T> {
        self
    }
}

/// `Σ a_i b_i` in doubled precision.
pub(crate) fn cdot2<T: Real, S: GramScalar<T>>(a: impl Iterator<Item = S> + Clone, b: impl Iterator<Item = S> + Clone) -> S {
    let pairs = a.map(|x| x.to_cplx()).zip(b.map(|y| y.to_cplx()));
    let p: Vec<_> = pairs.collect();
    let re = dot2(p.iter().flat_map(|(x, y)| [(x.re, y.re), (-x.im, y.im)]));
    let im = dot2(p.iter().flat_map(|(x, y)| [(x.re, y.im), (x.im, y.re)]));
    S::from_cplx(Cplx::new(re, im))
}

/// `∫_{u0}^{u1} ⟨member_j(t), member_k(t)⟩ dt` with `⟨x, y⟩ = Σ x ȳ`.
pub(crate) fn entry<T: Real>(fam: &FamilySpec<T>, j: usize, k: usize, u0: T, u1: T) -> Cplx<T> {
    let (tj, nj) = fam.terms(j);
    let (tk, nk) = fam.terms(k);
    let mut acc = cr(T::zero());
    for &(ca, za) in &tj[..nj] {
        for &(cb, zb) in &tk[..nk] {
            acc += ca * cb.conj() * window_integral(za + zb.conj(), u0, u1);
        }
    }
    acc * cr(fam.amplitude_dot(j, k))
}

/// Full Gram matrix of `fam` over `[u0, u1]` in complex arithmetic.
pub(crate) fn gram_on<T: Real>(fam: &FamilySpec<T>, u0: T, u1: T) -> DMatrix<Cplx<T>> {
    let n = fam.member_count();
    let mut g = DMatrix::from_element(n, n, cr(T::zero()));
    for j in 0..n {
        for k in j..n {
            let v = entry(fam, j, k, u0, u1);
            g[(j, k)] = v;
            g[(k, j)] = v.conj();
        }
        g[(j, j)] = cr(g[(j, j)].re);
    }
    g
}

/// Hermitian positive semidefinite Gram matrix with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct GramMatrix<T: Real, S> {
    matrix: DMatrix<S>,
    values: Vec<T>,
    vectors: DMatrix<S>,
}

/// Result of a regularized Gram solve.
///
/// The solution is carried as an unevaluated sum `x + x_lo`; the low part
/// holds the corrections from refinement, so that `x + x_lo` resolves the
/// solution beyond working precision when the matrix is ill-conditioned.
#[derive(Debug, Clone)]
pub struct GramSolve<T: Real, S> {
    pub x: DVector<S>,
    pub x_lo: DVector<S>,
    /// Eigenvalues kept by the cutoff.
    pub rank: usize,
    /// True when the cutoff discarded part of the spectrum.
    pub truncated: bool,
    /// `max |G (x + x_lo) − b|`, evaluated in doubled precision.
    pub residual: T,
}

impl<T: Real, S: GramScalar<T>> GramSolve<T, S> {
    /// `x + x_lo` rounded to working precision.
    pub fn combined(&self) -> DVector<S> {
        &self.x + &self.x_lo
    }
}

fn renormalize<T: Real, S: GramScalar<T>>(hi: &mut DVector<S>, lo: &mut DVector<S>) {
    for (h, l) in hi.iter_mut().zip(lo.iter_mut()) {
        let (a, b) = (h.to_cplx(), l.to_cplx());
        let (re, re_lo) = two_sum(a.re, b.re);
        let (im, im_lo) = two_sum(a.im, b.im);
        *h = S::from_cplx(Cplx::new(re, im));
        *l = S::from_cplx(Cplx::new(re_lo, im_lo));
    }
}

impl<T: Real, S: GramScalar<T>> GramMatrix<T, S> {
    pub fn new(matrix: DMatrix<S>) -> Self {
        let h = (&matrix + matrix.adjoint()).scale(T::lit(0.5));
        let eig = SymmetricEigen::new(h);
        let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
        let n = idx.len();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
        Self { matrix, values, vectors }
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[T] {
        &self.values
    }

    pub fn sigma_min(&self) -> T {
        self.values[0]
    }

    pub fn sigma_max(&self) -> T {
        *self.values.last().unwrap()
    }

    /// `σ_max/σ_min`; infinite when `σ_min ≤ 0`.
    pub fn condition(&self) -> T {
        let lo = self.sigma_min();
        if lo > T::zero() {
            self.sigma_max() / lo
        } else {
            T::max_value().unwrap()
        }
    }

    /// Eigenvalues at or below `ε·σ_max` are treated as zero.
    pub fn cutoff(&self) -> T {
        T::eps() * self.sigma_max()
    }

    pub fn rank(&self) -> usize {
        let c = self.cutoff();
        self.values.iter().filter(|&&v| v > c).count()
    }

    pub fn is_singular(&self) -> bool {
        self.rank() < self.dim()
    }

    fn pinv_apply(&self, b: &DVector<S>) -> DVector<S> {
        let c = self.cutoff();
        let mut x = DVector::from_element(b.len(), S::zero());
        for (i, &v) in self.values.iter().enumerate() {
            if v > c {
                let col = self.vectors.column(i);
                let coef = col.dotc(b).unscale(v);
                x.axpy(coef, &col, S::one());
            }
        }
        x
    }

    /// `b − G (x + x_lo)` with doubled-precision accumulation.
    pub fn residual(&self, x: &DVector<S>, x_lo: &DVector<S>, b: &DVector<S>) -> DVector<S> {
        DVector::from_fn(b.len(), |i, _| {
            let row = self.matrix.row(i);
            let lhs = row.iter().chain(row.iter()).copied().chain(std::iter::once(S::one()));
            let rhs = x.iter().chain(x_lo.iter()).copied().chain(std::iter::once(-b[i]));
            -cdot2(lhs, rhs)
        })
    }

    /// Minimal-norm solution of `G x = b` with spectral cutoff and
    /// iterative refinement in doubled precision.
    pub fn solve(&self, b: &DVector<S>) -> GramSolve<T, S> {
        let n = b.len();
        let mut x = self.pinv_apply(b);
        let mut x_lo = DVector::from_element(n, S::zero());
        let rank = self.rank();
        let norm = |v: &DVector<S>| v.iter().fold(T::zero(), |m, z| m.max(cabs(z.to_cplx())));
        let mut r = self.residual(&x, &x_lo, b);
        let mut rn = norm(&r);
        if rank == self.dim() {
            for _ in 0..6 {
                let mut lo = &x_lo + self.pinv_apply(&r);
                let mut hi = x.clone();
                renormalize(&mut hi, &mut lo);
                let rc = self.residual(&hi, &lo, b);
                let cn = norm(&rc);
                if cn < rn {
                    x = hi;
                    x_lo = lo;
                    r = rc;
                    rn = cn;
                } else {
                    break;
                }
            }
        }
        GramSolve { x, x_lo, rank, truncated: rank < self.dim(), residual: rn }
    }
}

/// Real or complex Gram matrix, depending on the family kind.
#[derive(Debug, Clone)]
pub enum Gram<T: Real> {
    Real(GramMatrix<T, T>),
    Complex(GramMatrix<T, Cplx<T>>),
}

impl<T: Real> Gram<T> {
    pub fn dim(&self) -> usize {
        match self {
            Gram::Real(g) => g.dim(),
            Gram::Complex(g) => g.dim(),
        }
    }

    pub fn sigma_min(&self) -> T {
        match self {
            Gram::Real(g) => g.sigma_min(),
            Gram::Complex(g) => g.sigma_min(),
        }
    }

    pub fn condition(&self) -> T {
        match self {
            Gram::Real(g) => g.condition(),
            Gram::Complex(g) => g.condition(),
        }
    }

    pub fn is_singular(&self) -> bool {
        match self {
            Gram::Real(g) => g.is_singular(),
            Gram::Complex(g) => g.is_singular(),
        }
    }

    /// Entry `(j, k)` as a complex number.
    pub fn entry(&self, j: usize, k: usize) -> Cplx<T> {
        match self {
            Gram::Real(g) => cr(g.matrix()[(j, k)]),
            Gram::Complex(g) => g.matrix()[(j, k)],
        }
    }
}

/// Gram matrix of `fam` on `[0, T]`.
pub fn gram<T: Real>(fam: &FamilySpec<T>) -> Gram<T> {
    if fam.kind().is_real() {
        Gram::Real(real_gram(fam).expect("real family"))
    } else {
        Gram::Complex(complex_gram(fam))
    }
}

pub fn real_gram<T: Real>(fam: &FamilySpec<T>) -> Result<GramMatrix<T, T>, FamilyError> {
    if !fam.kind().is_real() {
        return Err(FamilyError::NotReal(fam.kind()));
    }
    Ok(GramMatrix::new(gram_on(fam, T::zero(), fam.horizon()).map(|z| z.re)))
}

pub fn complex_gram<T: Real>(fam: &FamilySpec<T>) -> GramMatrix<T, Cplx<T>> {
    GramMatrix::new(gram_on(fam, T::zero(), fam.horizon()))
}

/// Smallest eigenvalue and condition number.
pub fn sigma_min<T: Real>(g: &Gram<T>) -> (T, T) {
    (g.sigma_min(), g.condition())
}
