//! Biorthogonal families and the growth of their norms.

use super::gram::{cdot2, complex_gram, real_gram, GramMatrix, GramScalar};
use super::{FamilyError, FamilyKind, FamilySpec};
use crate::scalar::{cabs, Real};
use nalgebra::{DMatrix, DVector};

/// Coefficients of the biorthogonal family `Q'_n = Σ_j B_{jn} Q_j`.
#[derive(Debug, Clone)]
pub struct Biorthogonal<T: Real, S> {
    pub coefficients: DMatrix<S>,
    /// Low-order correction: the coefficients are `coefficients + coefficients_lo`.
    pub coefficients_lo: DMatrix<S>,
    /// `max |⟨Q_k, Q'_n⟩ − δ_kn|`.
    pub defect: T,
    pub rank: usize,
    /// Set when the spectral cutoff was active; `coefficients` is then a
    /// pseudo-inverse.
    pub singular: bool,
    pub condition: T,
    /// `‖Q'_n‖` in `L_2`.
    pub norms: Vec<T>,
}

fn build<T: Real, S: GramScalar<T>>(g: &GramMatrix<T, S>) -> Biorthogonal<T, S> {
    let n = g.dim();
    let mut b = DMatrix::from_element(n, n, S::zero());
    let mut b_lo = DMatrix::from_element(n, n, S::zero());
    let mut rank = n;
    for col in 0..n {
        let mut e = DVector::from_element(n, S::zero());
        e[col] = S::one();
        let s = g.solve(&e);
        rank = s.rank;
        b.set_column(col, &s.x.map(|z| z.conjugate()));
        b_lo.set_column(col, &s.x_lo.map(|z| z.conjugate()));
    }
    let gm = g.matrix();
    let mut defect = T::zero();
    for k in 0..n {
        for col in 0..n {
            let row = gm.row(k);
            let v = cdot2(
                row.iter().chain(row.iter()).copied(),
                b.column(col).iter().chain(b_lo.column(col).iter()).map(|z| z.conjugate()),
            );
            let d = if k == col { v - S::one() } else { v };
            defect = defect.max(cabs(d.to_cplx()));
        }
    }
    let norms = (0..n)
        .map(|col| {
            let bc = b.column(col) + b_lo.column(col);
            let gb = gm * bc.map(|z| z.conjugate());
            let q = cdot2(bc.iter().copied(), gb.iter().copied());
            q.to_cplx().re.max(T::zero()).sqrt()
        })
        .collect();
    Biorthogonal { coefficients: b, coefficients_lo: b_lo, defect, rank, singular: rank < n, condition: g.condition(), norms }
}

/// Biorthogonal coefficients of a real family.
pub fn biorthogonal<T: Real>(fam: &FamilySpec<T>) -> Result<Biorthogonal<T, T>, FamilyError> {
    Ok(build(&real_gram(fam)?))
}

pub fn biorthogonal_complex<T: Real>(fam: &FamilySpec<T>) -> Biorthogonal<T, nalgebra::Complex<T>> {
    build(&complex_gram(fam))
}

/// Least-squares fit `log ‖Q'_k‖ ≈ log C + β √λ_k`.
#[derive(Debug, Clone)]
pub struct GrowthFit<T> {
    pub beta: T,
    pub log_c: T,
    /// Root-mean-square residual of the linear fit.
    pub rms_residual: T,
    pub frequencies: Vec<T>,
    pub log_norms: Vec<T>,
    /// Coefficient of `λ_k` in a quadratic fit in `√λ_k` (zero below four
    /// modes).
    pub curvature: T,
    /// True unless the log-norms are convex in `√λ_k` with a quadratic term
    /// worth more than half of the linear variation over the fitted range.
    pub single_exponential: bool,
    /// `‖E'_{+k}‖` of a companion hyperbolic family, when given.
    pub hyperbolic_norms: Option<Vec<T>>,
    /// `‖Q'_k‖ / ‖E'_{+k}‖`.
    pub ratios: Option<Vec<T>>,
    pub biorthogonal_defect: T,
    pub singular: bool,
}

fn lstsq<T: Real>(x: &[T], y: &[T], degree: usize) -> Vec<T> {
    let a = DMatrix::from_fn(x.len(), degree + 1, |r, c| x[r].powi(c as i32));
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    svd.solve(&b, T::eps()).expect("svd solve").iter().copied().collect()
}

pub fn biorth_growth_fit<T: Real>(fam: &FamilySpec<T>, hyperbolic: Option<&FamilySpec<T>>) -> Result<GrowthFit<T>, FamilyError> {
    if fam.kind() != FamilyKind::Parabolic {
        return Err(FamilyError::UnsupportedKind(fam.kind()));
    }
    let bi = biorthogonal(fam)?;
    let s: Vec<T> = fam.eigenvalues().iter().map(|l| l.sqrt()).collect();
    let y: Vec<T> = bi.norms.iter().map(|n| n.ln()).collect();
    let k = s.len();
    let (log_c, beta, rms) = if k == 1 {
        (y[0], T::zero(), T::zero())
    } else {
        let p = lstsq(&s, &y, 1);
        let rss = s.iter().zip(&y).fold(T::zero(), |acc, (&x, &v)| {
            let r = v - p[0] - p[1] * x;
            acc + r * r
        });
        (p[0], p[1], (rss / T::from_count(k)).sqrt())
    };
    let (curvature, single) = if k >= 4 {
        let q = lstsq(&s, &y, 2);
        let span = s[k - 1] - s[0];
        let quad = q[2].abs() * (s[k - 1] * s[k - 1] - s[0] * s[0]);
        (q[2], q[2] <= T::zero() || quad <= T::lit(0.5) * beta.abs() * span)
    } else {
        (T::zero(), true)
    };
    let hyper = match hyperbolic {
        Some(h) => {
            if !matches!(h.kind(), FamilyKind::ExpPm | FamilyKind::ExpPlus) || h.mode_count() < k {
                return Err(FamilyError::UnsupportedKind(h.kind()));
            }
            Some(biorthogonal_complex(h).norms[..k].to_vec())
        }
        None => None,
    };
    let ratios = hyper.as_ref().map(|h| bi.norms.iter().zip(h).map(|(&q, &e)| q / e).collect());
    Ok(GrowthFit {
        beta,
        log_c,
        rms_residual: rms,
        frequencies: s,
        log_norms: y,
        curvature,
        single_exponential: single,
        hyperbolic_norms: hyper,
        ratios,
        biorthogonal_defect: bi.defect,
        singular: bi.singular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_gram_inverts() {
        let g = GramMatrix::<f64, f64>::new(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 5.0])));
        let b = build(&g);
        assert!((b.coefficients[(0, 0)] - 0.5).abs() < 1e-16);
        assert!((b.coefficients[(1, 1)] - 0.2).abs() < 1e-16);
        assert!(b.coefficients[(0, 1)].abs() < 1e-16);
        assert!((b.norms[1] - 0.2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_point_fit_is_exact_slope() {
        let a = DMatrix::from_element(2, 1, 1.0);
        let fam = FamilySpec::new(FamilyKind::Parabolic, vec![1.0, 4.0], a, vec![0], 1.0).unwrap();
        let fit = biorth_growth_fit(&fam, None).unwrap();
        let slope: f64 = fit.log_norms[1] - fit.log_norms[0];
        assert!((fit.beta - slope).abs() < 1e-12);
        assert!(fit.rms_residual < 1e-12);
    }
}
