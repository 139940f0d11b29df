//! Self-checks of the closed-form integral tables.

use super::gram::{entry, gram_on};
use super::{FamilyError, FamilyKind, FamilySpec};
use crate::scalar::{cabs, cexp, c, Real};
use crate::spectral::SpectralData;
use nalgebra::DMatrix;

/// `max_{j,k} |∫_{-T*}^{T*} ⟨S_j, C_k⟩ dt|` for the full-boundary sine and
/// cosine families. Odd times even, so this is zero up to rounding.
pub fn extension_orthogonality<T: Real>(spectral: &SpectralData<T>, k: usize, t_star: T) -> Result<T, FamilyError> {
    let fam = FamilySpec::from_spectral(FamilyKind::SinCos, spectral, super::ChannelSet::Full, k, t_star)?;
    let mut worst = T::zero();
    for j in 0..k {
        for m in k..2 * k {
            worst = worst.max(cabs(entry(&fam, j, m, -t_star, t_star)));
        }
    }
    Ok(worst)
}

/// Maximum entrywise gap between the Gram matrix of an `E_±` family on
/// `[-T*, T*]` and the Gram matrix of the same family shifted onto
/// `[0, 2T*]`, which is `D G D*` with `D = diag(e^{-iω T*})`.
pub fn shift_defect<T: Real>(fam: &FamilySpec<T>, t_star: T) -> Result<T, FamilyError> {
    if !matches!(fam.kind(), FamilyKind::ExpPlus | FamilyKind::ExpMinus | FamilyKind::ExpPm) {
        return Err(FamilyError::UnsupportedKind(fam.kind()));
    }
    let centred = gram_on(fam, -t_star, t_star);
    let shifted = gram_on(fam, T::zero(), t_star + t_star);
    let n = fam.member_count();
    let d: Vec<_> = (0..n)
        .map(|j| {
            let (terms, _) = fam.terms(j);
            cexp(terms[0].1 * c(-t_star, T::zero()))
        })
        .collect();
    let conj = DMatrix::from_fn(n, n, |r, q| d[r] * shifted[(r, q)] * d[q].conj());
    let scale = centred.iter().fold(T::zero(), |m, z| m.max(cabs(*z)));
    Ok(centred.iter().zip(conj.iter()).fold(T::zero(), |m, (a, b)| m.max(cabs(a - b))) / scale)
}
