//! Lowest eigenpairs of `K x = λ M x` for tree-structured `K`, `M`.
//!
//! Block inverse (subspace) iteration with Rayleigh–Ritz, using the
//! fill-free `LDLᵀ` of `K`. Tiny systems go through a dense Cholesky
//! reduction instead.

use super::mesh::TreeSymMatrix;
use super::SpectralError;
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DENSE_LIMIT: usize = 160;
const MAX_ITERATIONS: usize = 2000;

#[derive(Debug, Clone)]
pub(crate) struct Eigenpairs<T> {
    pub values: Vec<T>,
    /// Columns are M-orthonormal eigenvectors.
    pub vectors: DMatrix<T>,
}

pub(crate) fn lowest_eigenpairs<T: Real>(
    k: &TreeSymMatrix<T>,
    m: &TreeSymMatrix<T>,
    nev: usize,
    seed: u64,
) -> Result<Eigenpairs<T>, SpectralError> {
    let n = k.dim();
    if nev == 0 || nev > n {
        return Err(SpectralError::MeshTooCoarse { reason: format!("{nev} modes requested from {n} degrees of freedom") });
    }
    if m.diag.iter().any(|&d| !(d > T::zero())) {
        return Err(SpectralError::DegenerateMassMatrix);
    }
    let block = (2 * nev).max(nev + 8);
    if n <= DENSE_LIMIT || block >= n {
        return dense(k, m, nev);
    }
    subspace(k, m, nev, block, seed)
}

fn to_dense<T: Real>(a: &TreeSymMatrix<T>) -> DMatrix<T> {
    let n = a.dim();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = a.diag[i];
        let p = a.parent[i];
        if p != usize::MAX {
            d[(i, p)] = a.off[i];
            d[(p, i)] = a.off[i];
        }
    }
    d
}

fn dense<T: Real>(k: &TreeSymMatrix<T>, m: &TreeSymMatrix<T>, nev: usize) -> Result<Eigenpairs<T>, SpectralError> {
    let kd = to_dense(k);
    let md = to_dense(m);
    let chol = md.cholesky().ok_or(SpectralError::DegenerateMassMatrix)?;
    let l = chol.l();
    let linv_k = l.solve_lower_triangular(&kd).ok_or(SpectralError::DegenerateMassMatrix)?;
    let c = l.solve_lower_triangular(&linv_k.transpose()).ok_or(SpectralError::DegenerateMassMatrix)?;
    let c = (&c + c.transpose()) * T::lit(0.5);
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let lt = l.transpose();
    let mut vectors = DMatrix::zeros(k.dim(), nev);
    let mut values = Vec::with_capacity(nev);
    for (j, &i) in idx.iter().take(nev).enumerate() {
        let w = eig.eigenvectors.column(i).into_owned();
        let v = lt.solve_upper_triangular(&w).ok_or(SpectralError::DegenerateMassMatrix)?;
        vectors.set_column(j, &v);
        values.push(eig.eigenvalues[i]);
    }
    Ok(Eigenpairs { values, vectors })
}

fn mat_col_mul<T: Real>(a: &TreeSymMatrix<T>, x: &DMatrix<T>, j: usize) -> Vec<T> {
    a.mul_vec(x.column(j).as_slice())
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// M-orthonormalizes the columns of `y` in place (classical Gram–Schmidt,
/// two passes). Columns that collapse are replaced by fresh random vectors.
fn m_orthonormalize<T: Real>(m: &TreeSymMatrix<T>, y: &mut DMatrix<T>, rng: &mut ChaCha8Rng) {
    let (n, p) = y.shape();
    for j in 0..p {
        let mut attempts = 0;
        loop {
            let before = {
                let mv = mat_col_mul(m, y, j);
                dot(y.column(j).as_slice(), &mv).max(T::zero()).sqrt()
            };
            for _ in 0..2 {
                let mv = mat_col_mul(m, y, j);
                for i in 0..j {
                    let coef = dot(y.column(i).as_slice(), &mv);
                    let col_i = y.column(i).into_owned();
                    let mut col_j = y.column_mut(j);
                    col_j.axpy(-coef, &col_i, T::one());
                }
            }
            let mv = mat_col_mul(m, y, j);
            let norm = dot(y.column(j).as_slice(), &mv).max(T::zero()).sqrt();
            if norm > T::lit(1e-3) * before && norm > T::zero() {
                y.column_mut(j).scale_mut(T::one() / norm);
                break;
            }
            attempts += 1;
            assert!(attempts < 10, "cannot extend orthonormal block");
            for i in 0..n {
                y[(i, j)] = T::lit(rng.gen_range(-1.0..1.0));
            }
        }
    }
}

fn inf_norm<T: Real>(a: &TreeSymMatrix<T>) -> T {
    let n = a.dim();
    let mut rows: Vec<T> = a.diag.iter().map(|d| d.abs()).collect();
    for i in 0..n {
        let p = a.parent[i];
        if p != usize::MAX {
            rows[i] += a.off[i].abs();
            rows[p] += a.off[i].abs();
        }
    }
    rows.into_iter().fold(T::zero(), |a, b| a.max(b))
}

fn subspace<T: Real>(
    k: &TreeSymMatrix<T>,
    m: &TreeSymMatrix<T>,
    nev: usize,
    block: usize,
    seed: u64,
) -> Result<Eigenpairs<T>, SpectralError> {
    let n = k.dim();
    let ldl = k.ldl().ok_or_else(|| SpectralError::EigenSolverFailure {
        reason: "stiffness matrix is not positive definite".into(),
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::from_fn(n, block, |_, _| T::lit(rng.gen_range(-1.0..1.0)));
    m_orthonormalize(m, &mut x, &mut rng);
    let (k_norm, m_norm) = (inf_norm(k), inf_norm(m));
    let tol = T::eps() * T::lit(500.0);
    let mut best = T::max_value().unwrap();
    let mut stalled = 0;
    for _ in 0..MAX_ITERATIONS {
        let mut y = DMatrix::zeros(n, block);
        for j in 0..block {
            let mut v = mat_col_mul(m, &x, j);
            ldl.solve_in_place(&mut v);
            y.set_column(j, &DVector::from_vec(v));
        }
        m_orthonormalize(m, &mut y, &mut rng);
        let ky = DMatrix::from_fn(n, block, |_, _| T::zero());
        let mut ky = ky;
        for j in 0..block {
            ky.set_column(j, &DVector::from_vec(mat_col_mul(k, &y, j)));
        }
        let reduced = y.transpose() * &ky;
        let reduced = (&reduced + reduced.transpose()) * T::lit(0.5);
        let eig = SymmetricEigen::new(reduced);
        let mut idx: Vec<usize> = (0..block).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let w = DMatrix::from_fn(block, block, |r, c| eig.eigenvectors[(r, idx[c])]);
        x = &y * &w;
        let kx = &ky * &w;
        let theta: Vec<T> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();

        // Normwise backward error of each wanted Ritz pair.
        let mut worst = T::zero();
        for j in 0..nev {
            let mx = mat_col_mul(m, &x, j);
            let xn = x.column(j).norm();
            let r: T = kx
                .column(j)
                .iter()
                .zip(&mx)
                .fold(T::zero(), |acc, (&a, &b)| {
                    let d = a - theta[j] * b;
                    acc + d * d
                })
                .sqrt();
            let eta = r / ((k_norm + theta[j].abs() * m_norm) * xn);
            worst = worst.max(eta);
        }
        if worst <= tol {
            return Ok(finish(x, theta, nev));
        }
        if worst < best * T::lit(0.9) {
            best = worst;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 8 && best < T::eps().sqrt() * T::lit(1e-2) {
                return Ok(finish(x, theta, nev));
            }
        }
    }
    Err(SpectralError::EigenSolverFailure { reason: format!("subspace iteration did not converge (backward error {best:e})") })
}

fn finish<T: Real>(x: DMatrix<T>, theta: Vec<T>, nev: usize) -> Eigenpairs<T> {
    Eigenpairs { values: theta.into_iter().take(nev).collect(), vectors: x.columns(0, nev).into_owned() }
}
