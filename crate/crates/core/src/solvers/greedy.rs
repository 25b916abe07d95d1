//! CoSaMP and orthogonal matching pursuit baselines.

use std::cmp::Ordering;

use super::{check_problem, residual, SolverConfig, SolverTrace};
use crate::error::{Error, Result};
use crate::linalg::{dot, normal_equations, norm2};
use crate::sensing::SensingMatrix;
use crate::sparsity::{MeasurementVector, Signal};
use crate::thresholding::hard_threshold;

/// Least squares restricted to `columns`; returns the full-length solution
/// and whether a ridge was needed.
fn least_squares_on(
    a: &SensingMatrix,
    y: &MeasurementVector,
    columns: &[usize],
) -> Result<(Vec<f64>, bool)> {
    let k = columns.len();
    let cols: Vec<Vec<f64>> = columns.iter().map(|&j| a.column(j)).collect();
    let mut gram = vec![0.0; k * k];
    for p in 0..k {
        for q in p..k {
            let g = dot(&cols[p], &cols[q]);
            gram[p * k + q] = g;
            gram[q * k + p] = g;
        }
    }
    let rhs: Vec<f64> = cols.iter().map(|c| dot(c, y.as_slice())).collect();
    let ls = normal_equations(&gram, k, &rhs)?;
    let mut x = vec![0.0; a.cols()];
    for (&j, c) in columns.iter().zip(&ls.coefficients) {
        x[j] = *c;
    }
    Ok((x, ls.regularized))
}

fn top_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| match values[b].abs().total_cmp(&values[a].abs()) {
        Ordering::Equal => a.cmp(&b),
        ord => ord,
    });
    idx.truncate(k);
    idx
}

/// Compressive sampling matching pursuit with sparsity `s`.
///
/// Each iteration merges the `2s` largest entries of the proxy `A^T r` with
/// the current support, solves least squares on the merged set, prunes to
/// the `s` largest coefficients and updates the residual. Requires `3s <= N`.
pub fn cosamp(
    a: &SensingMatrix,
    y: &MeasurementVector,
    s: usize,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    check_problem(a, y)?;
    let n = a.cols();
    if 3 * s > n {
        return Err(Error::InvalidArgument(format!(
            "CoSaMP needs 3s <= N, got s={s}, N={n}"
        )));
    }
    let mut trace = SolverTrace::new(cfg.detail);
    let mut x = Signal::zeros(n);
    let mut r = y.as_slice().to_vec();
    trace.push(x.clone(), &r);
    if s == 0 {
        return Ok(trace);
    }

    for _ in 0..cfg.max_iters {
        let proxy = a.adjoint_slice(&r);
        let mut merged = top_indices(&proxy, 2 * s);
        merged.extend(trace.final_support().indices());
        merged.sort_unstable();
        merged.dedup();

        let (b, regularized) = least_squares_on(a, y, &merged)?;
        trace.regularized |= regularized;
        let next = hard_threshold(&Signal::from_vec_unchecked(b), s)?;
        let next_r = residual(a, y, next.as_slice());
        let change = crate::linalg::distance(next.as_slice(), x.as_slice());
        x = next;
        r = next_r;
        trace.push(x.clone(), &r);
        if change <= cfg.halt_tol || norm2(&r) == 0.0 {
            break;
        }
    }
    Ok(trace)
}

/// Orthogonal matching pursuit: `s` greedy selections of the column most
/// correlated with the residual, each followed by least squares on the
/// selected set. Stops early once the residual norm is within `halt_tol`.
pub fn omp(
    a: &SensingMatrix,
    y: &MeasurementVector,
    s: usize,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    check_problem(a, y)?;
    if s > a.rows().min(a.cols()) {
        return Err(Error::InvalidArgument(format!(
            "OMP needs s <= min(m, N), got s={s}, m={}, N={}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.cols();
    let mut trace = SolverTrace::new(cfg.detail);
    let mut r = y.as_slice().to_vec();
    trace.push(Signal::zeros(n), &r);
    let mut selected: Vec<usize> = Vec::with_capacity(s);

    for _ in 0..s {
        if norm2(&r) <= cfg.halt_tol {
            break;
        }
        let proxy = a.adjoint_slice(&r);
        let mut best: Option<(usize, f64)> = None;
        for (j, p) in proxy.iter().enumerate() {
            if selected.contains(&j) {
                continue;
            }
            if best.is_none_or(|(_, v)| p.abs() > v) {
                best = Some((j, p.abs()));
            }
        }
        let Some((j, corr)) = best else { break };
        if corr == 0.0 {
            break;
        }
        selected.push(j);
        selected.sort_unstable();
        let (x, regularized) = least_squares_on(a, y, &selected)?;
        trace.regularized |= regularized;
        r = residual(a, y, &x);
        trace.push(Signal::from_vec_unchecked(x), &r);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{gaussian_matrix, MatrixScaling};
    use crate::sparsity::support_of;

    fn meas(v: &[f64]) -> MeasurementVector {
        MeasurementVector::new(v.to_vec()).unwrap()
    }

    fn sparse(n: usize, entries: &[(usize, f64)]) -> Signal {
        let mut v = vec![0.0; n];
        for &(j, x) in entries {
            v[j] = x;
        }
        Signal::new(v).unwrap()
    }

    #[test]
    fn cosamp_identity_exact_in_one_iteration() {
        let a = SensingMatrix::identity(9);
        let x = sparse(9, &[(1, 2.0), (6, -1.0)]);
        let y = a.apply(&x).unwrap();
        let trace = cosamp(&a, &y, 3, &SolverConfig::default()).unwrap();
        assert_eq!(trace.iterates[1], x);
    }

    #[test]
    fn cosamp_orthonormal_recovers_thresholded_support() {
        // orthonormal matrix from a Gram-Schmidt of a Gaussian draw
        let g = gaussian_matrix(12, 12, 4, MatrixScaling::Rip).unwrap();
        let q = nalgebra::DMatrix::from_row_slice(12, 12, g.entries()).qr().q();
        let mut entries = Vec::with_capacity(144);
        for i in 0..12 {
            for j in 0..12 {
                entries.push(q[(i, j)]);
            }
        }
        let a = SensingMatrix::from_row_major(12, 12, entries).unwrap();
        let y = crate::signal_models::gaussian_noise(12, 1.0, 5).unwrap();
        for s in 1..=4 {
            let trace = cosamp(&a, &y, s, &SolverConfig::default()).unwrap();
            let direct = hard_threshold(&a.adjoint_apply(&y).unwrap(), s).unwrap();
            assert_eq!(trace.final_support(), &support_of(&direct));
        }
    }

    #[test]
    fn cosamp_requires_three_s_within_n() {
        let a = SensingMatrix::identity(5);
        assert!(cosamp(&a, &meas(&[1.0; 5]), 2, &SolverConfig::default()).is_err());
    }

    #[test]
    fn cosamp_flags_rank_deficient_least_squares() {
        let a = gaussian_matrix(3, 30, 2, MatrixScaling::Rip).unwrap();
        let y = a.apply(&sparse(30, &[(4, 1.0), (9, 1.0)])).unwrap();
        let trace = cosamp(&a, &y, 4, &SolverConfig::default()).unwrap();
        assert!(trace.regularized);
        assert!(trace.objectives.iter().all(|f| f.is_finite()));
    }

    #[test]
    fn omp_identity_picks_largest() {
        let a = SensingMatrix::identity(5);
        let y = meas(&[1.0, -7.0, 3.0, 0.5, 6.0]);
        let trace = omp(&a, &y, 2, &SolverConfig::default()).unwrap();
        assert_eq!(trace.final_support().indices(), &[1, 4]);
        assert_eq!(trace.final_iterate().as_slice(), &[0.0, -7.0, 0.0, 0.0, 6.0]);
    }

    #[test]
    fn omp_one_sparse_in_one_step() {
        let mut a = gaussian_matrix(15, 30, 8, MatrixScaling::Rip).unwrap();
        let norms: Vec<f64> = (0..30).map(|j| a.column_norm(j)).collect();
        let entries: Vec<f64> = a
            .entries()
            .iter()
            .enumerate()
            .map(|(k, v)| v / norms[k % 30])
            .collect();
        a = SensingMatrix::from_row_major(15, 30, entries).unwrap();
        let x = sparse(30, &[(17, 2.5)]);
        let y = a.apply(&x).unwrap();
        let trace = omp(&a, &y, 1, &SolverConfig::default()).unwrap();
        assert_eq!(trace.iterations(), 1);
        assert!(trace.final_iterate().distance(&x).unwrap() < 1e-12);
    }

    #[test]
    fn omp_residual_strictly_decreases() {
        for seed in 0..20 {
            let a = gaussian_matrix(20, 40, seed, MatrixScaling::Rip).unwrap();
            let x = sparse(40, &[(3, 1.0), (11, -2.0), (30, 0.7)]);
            let y = a.apply(&x).unwrap();
            let trace = omp(&a, &y, 3, &SolverConfig::default()).unwrap();
            for w in trace.residual_norms.windows(2) {
                assert!(w[1] < w[0], "seed {seed}: {:?}", trace.residual_norms);
            }
        }
    }

    #[test]
    fn omp_rejects_too_many_atoms() {
        let a = gaussian_matrix(3, 10, 0, MatrixScaling::Rip).unwrap();
        assert!(omp(&a, &meas(&[1.0, 2.0, 3.0]), 4, &SolverConfig::default()).is_err());
    }
}
