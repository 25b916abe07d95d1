//! Sensing matrices and restricted isometry constants.
//!
//! The weighted restricted isometry constant `delta_{w,s}` of `A` is the
//! smallest `delta` with
//!
//! ```text
//! (1 - delta) ||x||^2 <= ||A x||^2 <= (1 + delta) ||x||^2
//! ```
//!
//! for every `x` with `||x||_{w,0} <= s`. For a fixed support `I` the extreme
//! ratios are the extreme eigenvalues of the Gram matrix `A_I^T A_I`, so
//! `delta_{w,s}` is a maximum over feasible supports. By eigenvalue
//! interlacing it is enough to look at supports that cannot be extended
//! without leaving the budget.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::combinatorics::{enumerate_supports, BigCount, SupportBudget, MAX_ENUMERATION_N};
use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, norm2, symmetric_eigenvalues};
use crate::sparsity::{MeasurementVector, Signal, WeightVector};

/// Dense row-major `m x N` real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

/// How a Gaussian ensemble is normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixScaling {
    /// Entries drawn with variance `1/m`, so columns have norm close to one.
    Rip,
    /// The drawn matrix is rescaled so that its spectral norm equals `c < 1`.
    Spectral(f64),
}

impl SensingMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        check_len("matrix entries", entries.len(), rows * cols)?;
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut entries = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            entries[i * n + i] = *d;
        }
        Self {
            rows: n,
            cols: n,
            entries,
        }
    }

    /// Number of measurements `m`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Signal dimension `N`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        norm2(&self.column(j))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    /// `A x`.
    pub fn apply(&self, x: &Signal) -> Result<MeasurementVector> {
        check_len("signal vs matrix columns", x.len(), self.cols)?;
        Ok(MeasurementVector::from_vec_unchecked(self.apply_slice(x.as_slice())))
    }

    /// `A^T y`.
    pub fn adjoint_apply(&self, y: &MeasurementVector) -> Result<Signal> {
        check_len("measurements vs matrix rows", y.len(), self.rows)?;
        Ok(Signal::from_vec_unchecked(self.adjoint_slice(y.as_slice())))
    }

    pub(crate) fn apply_slice(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub(crate) fn adjoint_slice(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        out
    }

    /// `A^T A`, `N x N` row-major.
    pub fn gram(&self) -> Vec<f64> {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for i in 0..self.rows {
            let row = self.row(i);
            for p in 0..n {
                let rp = row[p];
                if rp == 0.0 {
                    continue;
                }
                for q in p..n {
                    g[p * n + q] += rp * row[q];
                }
            }
        }
        for p in 0..n {
            for q in 0..p {
                g[p * n + q] = g[q * n + p];
            }
        }
        g
    }
}

/// An `m x N` matrix with i.i.d. normal entries, deterministic in `seed`.
pub fn gaussian_matrix(m: usize, n: usize, seed: u64, scaling: MatrixScaling) -> Result<SensingMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_matrix_with_rng(&mut rng, m, n, scaling)
}

/// [`gaussian_matrix`] drawing from a caller-supplied generator.
pub fn gaussian_matrix_with_rng<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    n: usize,
    scaling: MatrixScaling,
) -> Result<SensingMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "matrix dimensions must be positive, got {m}x{n}"
        )));
    }
    if let MatrixScaling::Spectral(c) = scaling {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "spectral scaling must lie in (0, 1), got {c}"
            )));
        }
    }
    let sd = 1.0 / (m as f64).sqrt();
    let entries: Vec<f64> = (0..m * n)
        .map(|_| rng.sample::<f64, _>(StandardNormal) * sd)
        .collect();
    let a = SensingMatrix {
        rows: m,
        cols: n,
        entries,
    };
    match scaling {
        MatrixScaling::Rip => Ok(a),
        MatrixScaling::Spectral(c) => {
            let norm = spectral_norm(&a, 1e-15)?;
            Ok(a.scaled(c / norm))
        }
    }
}

const POWER_ITERATION_CAP: usize = 200_000;

/// Largest singular value of `A` by power iteration on `A^T A`.
///
/// Starts from the normalized all-ones vector, so the result is reproducible.
/// Stops when the Rayleigh quotient changes by at most `tol` relative.
pub fn spectral_norm(a: &SensingMatrix, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = a.cols;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0f64;
    let mut restarted = false;
    for _ in 0..POWER_ITERATION_CAP {
        let w = a.adjoint_slice(&a.apply_slice(&v));
        let next = dot(&v, &w);
        let wn = norm2(&w);
        if wn == 0.0 {
            if lambda == 0.0 && !restarted {
                // start vector in the null space; try a fixed non-uniform one
                restarted = true;
                v = (0..n).map(|j| 1.0 / (j as f64 + 1.0)).collect();
                let vn = norm2(&v);
                v.iter_mut().for_each(|x| *x /= vn);
                continue;
            }
            return Ok(0.0);
        }
        v = w.iter().map(|x| x / wn).collect();
        if (next - lambda).abs() <= tol * next.abs() {
            return Ok(next.max(0.0).sqrt());
        }
        lambda = next;
    }
    Err(Error::Numerical(format!(
        "power iteration did not converge in {POWER_ITERATION_CAP} steps"
    )))
}

/// Unweighted or weighted restricted isometry constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RipKind {
    Unweighted,
    Weighted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RipEstimate {
    pub delta: f64,
    /// The sparsity budget the constant refers to.
    pub order: f64,
    pub kind: RipKind,
    /// Feasible supports enumerated (the empty set included).
    pub supports_checked: BigCount,
}

/// Exact `delta_{w,s}` by enumerating the supports with `omega(I) <= s`.
///
/// `weights = None` gives the unweighted constant of order `floor(s)`.
/// Refuses `N > 25`.
pub fn rip_constant(
    a: &SensingMatrix,
    weights: Option<&WeightVector>,
    s: SupportBudget,
) -> Result<RipEstimate> {
    let n = a.cols;
    if n > MAX_ENUMERATION_N {
        return Err(Error::Refused(format!(
            "RIP enumeration needs N <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let uniform;
    let (w, kind) = match weights {
        Some(w) => {
            check_len("weights vs matrix columns", w.len(), n)?;
            (w, RipKind::Weighted)
        }
        None => {
            uniform = WeightVector::uniform(n);
            (&uniform, RipKind::Unweighted)
        }
    };
    let gram = a.gram();
    let mut checked: u64 = 0;
    let mut maximal = Vec::new();
    let mut it = enumerate_supports(w, s, n)?;
    while let Some(support) = it.next() {
        checked += 1;
        let used = it.current_weight();
        let extendable = (0..n)
            .any(|j| !support.contains(j) && s.admits(used + w.squared(j)));
        if !extendable && !support.is_empty() {
            maximal.push(support);
        }
    }
    let delta = maximal
        .par_iter()
        .map(|support| {
            let idx = support.indices();
            let k = idx.len();
            let mut sub = vec![0.0; k * k];
            for (p, &i) in idx.iter().enumerate() {
                for (q, &j) in idx.iter().enumerate() {
                    sub[p * k + q] = gram[i * n + j];
                }
            }
            let eig = symmetric_eigenvalues(&sub, k);
            (eig[k - 1] - 1.0).max(1.0 - eig[0])
        })
        .reduce(|| 0.0, f64::max);
    Ok(RipEstimate {
        delta: delta.max(0.0),
        order: s.value(),
        kind,
        supports_checked: BigCount::from(checked),
    })
}

/// Worst slack of each inequality in a [`check_rip_bounds`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct RipBoundsReport {
    pub trials: usize,
    /// Budgets `t` used and their enumerated `delta_{w,t}`.
    pub budgets: Vec<(f64, f64)>,
    /// Violations of: the inner-product bound, the restricted-row bound and
    /// the adjoint bound, in that order.
    pub violations: [usize; 3],
    /// `min(rhs - lhs)` per inequality; nonnegative when nothing failed.
    pub worst_margin: [f64; 3],
}

impl RipBoundsReport {
    pub fn total_violations(&self) -> usize {
        self.violations.iter().sum()
    }
}

/// Checks, on random sparse data, the three standard consequences of the
/// weighted RIP:
///
/// 1. `|<u, (I - A^T A) v>| <= delta_{w,t} ||u|| ||v||` when `omega(supp u ∪ supp v) <= t`,
/// 2. `||((I - A^T A) v)_S|| <= delta_{w,t} ||v||` when `omega(S ∪ supp v) <= t`,
/// 3. `||(A^T y)_S|| <= sqrt(1 + delta_{w,s}) ||y||` when `omega(S) <= s`.
///
/// Budgets `t` are `k * max_j w_j^2` for `k = 1, 2, 3`, with constants from
/// [`rip_constant`]. Refuses `N > 20`.
pub fn check_rip_bounds(
    a: &SensingMatrix,
    w: &WeightVector,
    trials: usize,
    seed: u64,
) -> Result<RipBoundsReport> {
    let n = a.cols;
    if n > 20 {
        return Err(Error::Refused(format!(
            "RIP bound checks need N <= 20, got {n}"
        )));
    }
    check_len("weights vs matrix columns", w.len(), n)?;
    let wmax2 = w.max() * w.max();
    let budgets = (1..=3)
        .map(|k| {
            let t = SupportBudget::new(k as f64 * wmax2)?;
            Ok((t, rip_constant(a, Some(w), t)?.delta))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = [0usize; 3];
    let mut worst = [f64::INFINITY; 3];
    let mut record = |k: usize, lhs: f64, rhs: f64, scale: f64| {
        let margin = rhs - lhs;
        worst[k] = worst[k].min(margin);
        if margin < -1e-12 * scale.max(1e-300) {
            violations[k] += 1;
        }
    };

    for _ in 0..trials {
        let (t, delta) = budgets[rng.random_range(0..budgets.len())];

        // 1: u and v supported inside one feasible set
        let joint = random_feasible_support(&mut rng, w, t);
        let u = random_vector_on(&mut rng, n, &joint, 0.5);
        let v = random_vector_on(&mut rng, n, &joint, 0.5);
        let au = a.apply_slice(&u);
        let av = a.apply_slice(&v);
        let lhs = (dot(&u, &v) - dot(&au, &av)).abs();
        let scale = norm2(&u) * norm2(&v);
        record(0, lhs, delta * scale, scale * (1.0 + delta));

        // 2: S and supp(v) inside one feasible set
        let joint = random_feasible_support(&mut rng, w, t);
        let v = random_vector_on(&mut rng, n, &joint, 0.7);
        let in_s: Vec<bool> = (0..n)
            .map(|j| joint.contains(&j) && rng.random_bool(0.6))
            .collect();
        let atav = a.adjoint_slice(&a.apply_slice(&v));
        let restricted: Vec<f64> = (0..n)
            .map(|j| if in_s[j] { v[j] - atav[j] } else { 0.0 })
            .collect();
        let vn = norm2(&v);
        record(1, norm2(&restricted), delta * vn, vn * (1.0 + delta));

        // 3: arbitrary y, feasible S
        let set = random_feasible_support(&mut rng, w, t);
        let y: Vec<f64> = (0..a.rows).map(|_| rng.sample(StandardNormal)).collect();
        let aty = a.adjoint_slice(&y);
        let restricted: Vec<f64> = (0..n)
            .map(|j| if set.contains(&j) { aty[j] } else { 0.0 })
            .collect();
        let yn = norm2(&y);
        record(2, norm2(&restricted), (1.0 + delta).sqrt() * yn, yn * (1.0 + delta));
    }

    Ok(RipBoundsReport {
        trials,
        budgets: budgets.iter().map(|(t, d)| (t.value(), *d)).collect(),
        violations,
        worst_margin: worst,
    })
}

/// Random index set with `omega <= t`: scan a random permutation and admit
/// indices that fit, stopping early at a random size.
pub(crate) fn random_feasible_support<R: Rng + ?Sized>(
    rng: &mut R,
    w: &WeightVector,
    t: SupportBudget,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.shuffle(rng);
    let target = rng.random_range(1..=w.len());
    let mut used = 0.0;
    let mut out = Vec::new();
    for j in order {
        if out.len() >= target {
            break;
        }
        if t.admits(used + w.squared(j)) {
            used += w.squared(j);
            out.push(j);
        }
    }
    out.sort_unstable();
    out
}

fn random_vector_on<R: Rng + ?Sized>(rng: &mut R, n: usize, support: &[usize], p: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for &j in support {
        if rng.random_bool(p) {
            v[j] = rng.sample(StandardNormal);
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget(s: f64) -> SupportBudget {
        SupportBudget::new(s).unwrap()
    }

    #[test]
    fn identity_and_scaled_identity_products() {
        let x = Signal::new(vec![1.0, -2.0, 3.5]).unwrap();
        let y = SensingMatrix::identity(3).apply(&x).unwrap();
        assert_eq!(y.as_slice(), x.as_slice());
        let y = SensingMatrix::identity(3).scaled(2.0).apply(&x).unwrap();
        assert_eq!(y.as_slice(), &[2.0, -4.0, 7.0]);
    }

    #[test]
    fn dimension_errors() {
        let a = SensingMatrix::identity(3);
        assert!(matches!(a.apply(&Signal::zeros(2)), Err(Error::Dimension(_))));
        assert!(matches!(
            a.adjoint_apply(&MeasurementVector::zeros(4)),
            Err(Error::Dimension(_))
        ));
        assert!(SensingMatrix::from_row_major(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn adjoint_consistency() {
        let a = gaussian_matrix(7, 11, 3, MatrixScaling::Rip).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let x = Signal::new((0..11).map(|_| rng.sample(StandardNormal)).collect()).unwrap();
            let y = MeasurementVector::new((0..7).map(|_| rng.sample(StandardNormal)).collect()).unwrap();
            let lhs = dot(a.apply(&x).unwrap().as_slice(), y.as_slice());
            let rhs = dot(x.as_slice(), a.adjoint_apply(&y).unwrap().as_slice());
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn gaussian_matrix_is_deterministic() {
        let a = gaussian_matrix(16, 32, 99, MatrixScaling::Rip).unwrap();
        let b = gaussian_matrix(16, 32, 99, MatrixScaling::Rip).unwrap();
        assert_eq!(a, b);
        let c = gaussian_matrix(16, 32, 100, MatrixScaling::Rip).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn spectral_scaling_hits_target() {
        for seed in 0..5 {
            let a = gaussian_matrix(4, 4, seed, MatrixScaling::Spectral(0.9)).unwrap();
            assert!((spectral_norm(&a, 1e-15).unwrap() - 0.9).abs() < 1e-10);
        }
        assert!(gaussian_matrix(4, 4, 0, MatrixScaling::Spectral(1.0)).is_err());
    }

    #[test]
    fn spectral_norm_simple_cases() {
        assert!((spectral_norm(&SensingMatrix::identity(5), 1e-12).unwrap() - 1.0).abs() < 1e-12);
        let d = SensingMatrix::diagonal(&[3.0, 1.0, 0.5]);
        assert!((spectral_norm(&d, 1e-14).unwrap() - 3.0).abs() < 1e-10);
        assert!(spectral_norm(&d, 0.0).is_err());
    }

    #[test]
    fn spectral_norm_start_vector_in_null_space() {
        let a = SensingMatrix::from_row_major(1, 2, vec![1.0, -1.0]).unwrap();
        assert!((spectral_norm(&a, 1e-14).unwrap() - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn spectral_norm_matches_svd() {
        for seed in 0..10 {
            let a = gaussian_matrix(10, 10, seed, MatrixScaling::Rip).unwrap();
            let svd = nalgebra::DMatrix::from_row_slice(10, 10, a.entries()).singular_values();
            let top = svd.iter().copied().fold(0.0, f64::max);
            let ours = spectral_norm(&a, 1e-15).unwrap();
            assert!((ours - top).abs() < 1e-8, "seed {seed}: {ours} vs {top}");
        }
    }

    #[test]
    fn column_norms_concentrate() {
        for seed in 0..200 {
            let a = gaussian_matrix(128, 256, seed, MatrixScaling::Rip).unwrap();
            for j in 0..256 {
                let c = a.column_norm(j);
                assert!((0.7..=1.3).contains(&c), "seed {seed} column {j}: {c}");
            }
        }
    }

    #[test]
    fn rip_of_identity_and_scaled_identity() {
        let w = WeightVector::new(vec![1.0, 2.0, 1.5, 1.0]).unwrap();
        let est = rip_constant(&SensingMatrix::identity(4), Some(&w), budget(5.0)).unwrap();
        assert_eq!(est.delta, 0.0);
        assert_eq!(est.kind, RipKind::Weighted);
        let est = rip_constant(&SensingMatrix::identity(4).scaled(2.0), Some(&w), budget(1.0)).unwrap();
        assert!((est.delta - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rip_refuses_large_n() {
        let a = gaussian_matrix(4, 26, 0, MatrixScaling::Rip).unwrap();
        assert!(matches!(rip_constant(&a, None, budget(2.0)), Err(Error::Refused(_))));
    }

    #[test]
    fn rip_empty_budget_is_zero() {
        let a = gaussian_matrix(4, 6, 0, MatrixScaling::Rip).unwrap();
        let est = rip_constant(&a, None, budget(0.5)).unwrap();
        assert_eq!(est.delta, 0.0);
        assert_eq!(est.supports_checked, BigCount::from(1));
    }

    /// Brute force over every subset, no interlacing shortcut and nalgebra
    /// for the singular values.
    fn brute_force_delta(a: &SensingMatrix, w: &WeightVector, s: f64) -> f64 {
        let n = a.cols();
        let full = nalgebra::DMatrix::from_row_slice(a.rows(), n, a.entries());
        let mut delta = 0.0f64;
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
            let weight: f64 = idx.iter().map(|&j| w.squared(j)).sum();
            if weight > s + 1e-12 * s.max(1.0) {
                continue;
            }
            let sub = full.select_columns(&idx);
            let sv = sub.singular_values();
            let hi = sv.iter().copied().fold(0.0, f64::max);
            let lo = if idx.len() > a.rows() {
                0.0
            } else {
                sv.iter().copied().fold(f64::INFINITY, f64::min)
            };
            delta = delta.max(hi * hi - 1.0).max(1.0 - lo * lo);
        }
        delta
    }

    #[test]
    fn rip_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..6 {
            let a = gaussian_matrix(6, 10, seed, MatrixScaling::Rip).unwrap();
            let w = WeightVector::new(
                (0..10).map(|_| (rng.random_range(1..=4) as f64).sqrt()).collect(),
            )
            .unwrap();
            for s in [1.0, 3.0, 5.5, 8.0] {
                let est = rip_constant(&a, Some(&w), budget(s)).unwrap();
                let brute = brute_force_delta(&a, &w, s);
                assert!((est.delta - brute).abs() < 1e-10, "seed {seed} s {s}: {} vs {brute}", est.delta);
            }
        }
    }

    #[test]
    fn uniform_weights_give_unweighted_constant() {
        let a = gaussian_matrix(8, 12, 1, MatrixScaling::Rip).unwrap();
        let weighted = rip_constant(&a, Some(&WeightVector::uniform(12)), budget(3.7)).unwrap();
        let plain = rip_constant(&a, None, budget(3.0)).unwrap();
        assert_eq!(weighted.delta, plain.delta);
        assert_eq!(plain.kind, RipKind::Unweighted);
    }

    #[test]
    fn rip_is_monotone_in_budget() {
        let a = gaussian_matrix(8, 14, 2, MatrixScaling::Rip).unwrap();
        let w = WeightVector::sqrt_index(14);
        let mut last = 0.0;
        for s in 0..=20 {
            let d = rip_constant(&a, Some(&w), SupportBudget::from(s)).unwrap().delta;
            assert!(d >= last);
            last = d;
        }
    }

    #[test]
    fn weighted_constant_below_unweighted_of_max_support_size() {
        use crate::combinatorics::max_support_size;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..10 {
            let a = gaussian_matrix(10, 16, 100 + seed, MatrixScaling::Rip).unwrap();
            let w = WeightVector::new(
                (0..16).map(|_| (rng.random_range(1..=5) as f64).sqrt()).collect(),
            )
            .unwrap();
            for s in [2.0, 4.0, 7.0] {
                let weighted = rip_constant(&a, Some(&w), budget(s)).unwrap().delta;
                let k = max_support_size(&w, budget(s));
                let plain = rip_constant(&a, None, SupportBudget::from(k)).unwrap().delta;
                assert!(weighted <= plain + 1e-15);
            }
        }
    }

    #[test]
    fn heavy_tail_columns_are_invisible_to_weighted_constant() {
        // sqrt weights, budget 6: supports live in {0,1,2,...} with 1-based
        // index sums <= 6, so column 15 never participates.
        let a = gaussian_matrix(10, 16, 21, MatrixScaling::Rip).unwrap();
        let w = WeightVector::sqrt_index(16);
        let s = budget(6.0);
        let k = crate::combinatorics::max_support_size(&w, s);
        let before_w = rip_constant(&a, Some(&w), s).unwrap().delta;
        let before_u = rip_constant(&a, None, SupportBudget::from(k)).unwrap().delta;
        let mut entries = a.entries().to_vec();
        for i in 0..10 {
            entries[i * 16 + 15] *= 3.0;
        }
        let b = SensingMatrix::from_row_major(10, 16, entries).unwrap();
        assert_eq!(rip_constant(&b, Some(&w), s).unwrap().delta, before_w);
        assert!(rip_constant(&b, None, SupportBudget::from(k)).unwrap().delta > before_u);
    }

    #[test]
    fn rip_bounds_identity_have_nonnegative_margins() {
        let w = WeightVector::new(vec![1.0, 2f64.sqrt(), 1.0, 3.0, 1.0, 1.0]).unwrap();
        let report = check_rip_bounds(&SensingMatrix::identity(6), &w, 200, 1).unwrap();
        assert_eq!(report.total_violations(), 0);
        assert!(report.worst_margin.iter().all(|&m| m >= 0.0));
        assert!(report.budgets.iter().all(|&(_, d)| d == 0.0));
    }

    #[test]
    fn rip_bounds_random_instance() {
        let a = gaussian_matrix(10, 16, 7, MatrixScaling::Rip).unwrap();
        let w = WeightVector::new((0..16).map(|j| if j < 8 { 1.0 } else { 2f64.sqrt() }).collect()).unwrap();
        let report = check_rip_bounds(&a, &w, 500, 3).unwrap();
        assert_eq!(report.total_violations(), 0, "{report:?}");
    }

    #[test]
    fn random_feasible_support_respects_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = WeightVector::sqrt_index(12);
        for _ in 0..500 {
            let set = random_feasible_support(&mut rng, &w, budget(10.0));
            let total: f64 = set.iter().map(|&j| w.squared(j)).sum();
            assert!(total <= 10.0 + 1e-9);
        }
    }
}
