//! Small dense kernels: vector helpers, a cyclic Jacobi eigensolver for
//! symmetric matrices, and Cholesky-based least squares.

use crate::error::{Error, Result};

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    // scaled to avoid overflow on large iterates
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let ss: f64 = a.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * ss.sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&diff)
}

/// Eigenvalues of the symmetric `n x n` matrix `a` (row-major), ascending.
///
/// Cyclic Jacobi rotations; accurate to a few ulps of `max|lambda|` for the
/// column counts used by the RIP enumeration (at most 25).
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    for sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        let diag: f64 = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) || (sweep > 0 && off == 0.0) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Solves `(G + ridge I) x = b` for symmetric positive (semi)definite `G`.
/// Returns `None` when a pivot is not positive.
fn cholesky_solve(g: &[f64], n: usize, b: &[f64], ridge: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = g[i * n + j];
            if i == j {
                sum += ridge;
            }
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut z = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            z[i] -= l[i * n + k] * z[k];
        }
        z[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            z[i] -= l[k * n + i] * z[k];
        }
        z[i] /= l[i * n + i];
    }
    Some(z)
}

/// Outcome of a normal-equations least-squares solve.
#[derive(Debug, Clone)]
pub(crate) struct LeastSquares {
    pub coefficients: Vec<f64>,
    /// True when the Gram matrix was singular and a ridge was added.
    pub regularized: bool,
}

/// Least squares `min ||B c - y||` via the normal equations, where `gram`
/// is `B^T B` (`k x k`) and `rhs` is `B^T y`.
///
/// A singular Gram matrix gets a ridge starting at `1e-12 * max diag`,
/// increased tenfold until the factorization succeeds.
pub(crate) fn normal_equations(gram: &[f64], k: usize, rhs: &[f64]) -> Result<LeastSquares> {
    if k == 0 {
        return Ok(LeastSquares {
            coefficients: Vec::new(),
            regularized: false,
        });
    }
    if let Some(c) = cholesky_solve(gram, k, rhs, 0.0) {
        if c.iter().all(|v| v.is_finite()) && well_conditioned(gram, k) {
            return Ok(LeastSquares {
                coefficients: c,
                regularized: false,
            });
        }
    }
    let scale = (0..k).map(|i| gram[i * k + i]).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let mut ridge = 1e-12 * scale;
    for _ in 0..12 {
        if let Some(c) = cholesky_solve(gram, k, rhs, ridge) {
            if c.iter().all(|v| v.is_finite()) {
                return Ok(LeastSquares {
                    coefficients: c,
                    regularized: true,
                });
            }
        }
        ridge *= 10.0;
    }
    Err(Error::Numerical(
        "least-squares normal equations could not be factorized".into(),
    ))
}

/// Cheap check that the Cholesky of `gram` did not succeed on a numerically
/// singular matrix: the smallest pivot must not be negligible.
fn well_conditioned(gram: &[f64], k: usize) -> bool {
    let mut l = vec![0.0; k * k];
    let max_diag = (0..k).map(|i| gram[i * k + i]).fold(0.0f64, f64::max);
    for i in 0..k {
        for j in 0..=i {
            let mut sum = gram[i * k + j];
            for t in 0..j {
                sum -= l[i * k + t] * l[j * k + t];
            }
            if i == j {
                if sum <= 1e-13 * max_diag {
                    return false;
                }
                l[i * k + i] = sum.sqrt();
            } else {
                l[i * k + j] = sum / l[j * k + j];
            }
        }
    }
    true
}
