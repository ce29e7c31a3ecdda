//! Independent reference computations used only by unit tests.

#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

use alloc::vec::Vec;

use crate::numerics::DenseMatrix;

/// Gauss-Jordan elimination with full pivoting on an augmented copy.
pub fn gauss_solve(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = a.row(i).to_vec();
            r.push(b[i]);
            r
        })
        .collect();
    let mut col_of: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for (i, row) in m.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().take(n).skip(k) {
                if v.abs() > best {
                    best = v.abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        m.swap(k, pi);
        for row in m.iter_mut() {
            row.swap(k, pj);
        }
        col_of.swap(k, pj);
        let p = m[k][k];
        for v in m[k].iter_mut() {
            *v /= p;
        }
        let pivot_row = m[k].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != k {
                let f = row[k];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    let mut x = alloc::vec![0.0; n];
    for k in 0..n {
        x[col_of[k]] = m[k][n];
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// Singular values (descending) from the eigenvalues of `MᵀM`.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    let gram = m.transpose().matmul(m).unwrap();
    let mut s: Vec<f64> = jacobi_eigenvalues(&gram)
        .into_iter()
        .map(|v| libm::sqrt(v.max(0.0)))
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Modified Bessel function of the second kind from its integral
/// representation `K_ν(z) = ∫₀^∞ exp(−z cosh t) cosh(νt) dt`.
pub fn bessel_k(nu: f64, z: f64) -> f64 {
    let f = |t: f64| libm::exp(-z * libm::cosh(t)) * libm::cosh(nu * t);
    // Integrand is below 1e-300 once z cosh t − ν t > 700.
    let mut upper = 1.0;
    while z * libm::cosh(upper) - nu * upper < 700.0 {
        upper += 0.5;
    }
    let (fa, fm, fb) = (f(0.0), f(0.5 * upper), f(upper));
    let whole = simpson(0.0, upper, fa, fm, fb);
    adaptive_simpson(&f, 0.0, upper, fa, fm, fb, whole, 1e-15, 50)
}

/// Γ(ν) for positive half-integers and integers.
pub fn gamma_half_integer(nu: f64) -> f64 {
    let (mut g, mut x) = if (nu - libm::floor(nu) - 0.5).abs() < 1e-12 {
        (libm::sqrt(core::f64::consts::PI), 0.5)
    } else {
        (1.0, 1.0)
    };
    while x < nu - 1e-12 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Matérn covariance with the unscaled argument `h/ℓ`, evaluated from the
/// Bessel integral.
pub fn matern_via_bessel(nu: f64, h: f64, ell: f64, variance: f64) -> f64 {
    if h == 0.0 {
        return variance;
    }
    let z = h / ell;
    variance / (libm::pow(2.0, nu - 1.0) * gamma_half_integer(nu)) * libm::pow(z, nu) * bessel_k(nu, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_half_order_closed_form() {
        // K_{1/2}(z) = sqrt(π / 2z) e^{−z}
        for &z in &[0.1, 1.0, 3.0] {
            let exact = libm::sqrt(core::f64::consts::PI / (2.0 * z)) * libm::exp(-z);
            assert!((bessel_k(0.5, z) - exact).abs() < 1e-12 * exact.max(1.0));
        }
    }

    #[test]
    fn gamma_values() {
        assert!((gamma_half_integer(1.5) - 0.5 * libm::sqrt(core::f64::consts::PI)).abs() < 1e-15);
        assert!((gamma_half_integer(4.0) - 6.0).abs() < 1e-15);
    }
}
