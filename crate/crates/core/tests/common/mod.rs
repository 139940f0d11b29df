//! Oracles shared by the integration tests. Nothing here calls into the
//! numerical code under test.
#![allow(clippy::excessive_precision, dead_code)]

use nalgebra::{Complex, DMatrix};

const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod(f: &mut impl FnMut(f64) -> Complex<f64>, a: f64, b: f64) -> (Complex<f64>, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut k = Complex::new(0.0, 0.0);
    let mut g = Complex::new(0.0, 0.0);
    for i in 0..8 {
        if XK[i] == 0.0 {
            let v = f(c);
            k += v * WK[i];
            g += v * WG[3];
            continue;
        }
        let (l, r) = (f(c - h * XK[i]), f(c + h * XK[i]));
        k += (l + r) * WK[i];
        if i % 2 == 1 {
            g += (l + r) * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive Gauss–Kronrod (7, 15) quadrature of a complex integrand to
/// accuracy `max(rtol · ∫|f|, atol)`.
pub fn integrate(mut f: impl FnMut(f64) -> Complex<f64>, a: f64, b: f64, rtol: f64, atol: f64) -> Complex<f64> {
    fn rec(f: &mut impl FnMut(f64) -> Complex<f64>, a: f64, b: f64, tol: f64, depth: u32) -> Complex<f64> {
        let (v, err) = kronrod(f, a, b);
        if err <= tol || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    // Start from a few panels so oscillatory integrands are sampled.
    let panels = 16;
    let h = (b - a) / panels as f64;
    let mag: f64 = (0..panels)
        .map(|i| kronrod(&mut |x| Complex::new(f(x).norm(), 0.0), a + h * i as f64, a + h * (i + 1) as f64).0.re)
        .sum();
    let tol = (rtol * mag).max(atol);
    (0..panels).map(|i| rec(&mut f, a + h * i as f64, a + h * (i + 1) as f64, tol / panels as f64, 20)).sum()
}

/// Vertex matrix of a star with constant densities and Dirichlet leaves.
/// Edge `j` carries `A_j sin(ω √ρ_j y)`, `y` measured from the leaf; rows
/// are continuity at the centre and the Kirchhoff balance.
fn star_matrix(lengths: &[f64], densities: &[f64], omega: f64) -> DMatrix<f64> {
    let n = lengths.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let q = densities[j].sqrt() * omega;
        let (s, c) = (q * lengths[j]).sin_cos();
        if j + 1 < n {
            m[(j, j)] = s;
        }
        if j > 0 {
            m[(j - 1, j)] = -s;
        }
        m[(n - 1, j)] = densities[j].sqrt() * c;
    }
    m
}

fn singular_values(lengths: &[f64], densities: &[f64], omega: f64) -> Vec<f64> {
    let mut s: Vec<f64> = star_matrix(lengths, densities, omega).singular_values().iter().copied().collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s
}

/// First `count` Dirichlet frequencies `√λ` of a star with constant
/// densities, with multiplicity, from the roots of `det M(ω)`.
///
/// Scans `σ_min(M(ω))` on a fine grid, refines every local minimum by
/// golden-section search, and counts the multiplicity as the nullity.
pub fn star_frequencies(lengths: &[f64], densities: &[f64], count: usize) -> Vec<f64> {
    let smin = |w: f64| singular_values(lengths, densities, w)[0];
    let step = 1e-3;
    let mut out = Vec::new();
    let mut w = step;
    let (mut f0, mut f1) = (smin(w - step * 0.5), smin(w));
    while out.len() < count {
        let f2 = smin(w + step);
        if f1 <= f0 && f1 <= f2 {
            let (mut a, mut b) = (w - step, w + step);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
            let (mut y1, mut y2) = (smin(x1), smin(x2));
            for _ in 0..200 {
                if y1 < y2 {
                    b = x2;
                    x2 = x1;
                    y2 = y1;
                    x1 = b - g * (b - a);
                    y1 = smin(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    y1 = y2;
                    x2 = a + g * (b - a);
                    y2 = smin(x2);
                }
                if b - a < 1e-15 * b {
                    break;
                }
            }
            let root = 0.5 * (a + b);
            let sv = singular_values(lengths, densities, root);
            let scale = sv.last().copied().unwrap_or(1.0);
            let nullity = sv.iter().filter(|&&s| s < 1e-8 * scale).count();
            for _ in 0..nullity {
                out.push(root);
            }
        }
        f0 = f1;
        f1 = f2;
        w += step;
    }
    out.truncate(count);
    out
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}
