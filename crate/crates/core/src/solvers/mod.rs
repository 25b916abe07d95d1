//! Greedy solvers for `min 1/2 ||y - A x||^2` under a (weighted) sparsity
//! constraint, and diagnostics that check their convergence guarantees.
//!
//! [`iht`] and [`ihwt`] share one projected gradient loop,
//!
//! ```text
//! x^{n+1} = P(x^n + mu A^T (y - A x^n)),    x^0 = 0,
//! ```
//!
//! where `P` is hard thresholding for IHT and a weighted projection for
//! IHWT. With unit weights the two produce bit-identical traces.

mod diagnostics;
mod greedy;

pub use diagnostics::{
    balanced_mm_surrogate, contraction_ratios, delta_threshold, descent_diagnostics, mm_surrogate, objective, theorem_bound,
    weighted_energy_bound_check, BoundReport, BoundVariant, DescentReport, EnergyBoundReport,
    DESCENT_REL_TOL,
};
pub use greedy::{cosamp, omp};

use crate::combinatorics::SupportBudget;
use crate::error::{check_len, Error, Result};
use crate::linalg::distance;
use crate::sensing::SensingMatrix;
use crate::sparsity::{support_of, MeasurementVector, Signal, SupportSet, WeightVector};
use crate::thresholding::{Projection, ProjectionMode};

/// How much of the iteration history a trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceDetail {
    /// Every iterate and support.
    #[default]
    Full,
    /// Objectives and residual norms for every iteration, but only the final
    /// iterate and support. Used by the experiment sweeps.
    Light,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Halt once `||x^{n+1} - x^n||_2 <= halt_tol`.
    pub halt_tol: f64,
    /// Weighted projection used by [`ihwt`].
    pub projection: ProjectionMode,
    pub step_size: f64,
    pub detail: TraceDetail,
    /// Starting point; zero when absent.
    pub initial: Option<Signal>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            halt_tol: 1e-10,
            projection: ProjectionMode::Surrogate,
            step_size: 1.0,
            detail: TraceDetail::Full,
            initial: None,
        }
    }
}

impl SolverConfig {
    pub fn with_projection(mut self, mode: ProjectionMode) -> Self {
        self.projection = mode;
        self
    }

    pub fn with_detail(mut self, detail: TraceDetail) -> Self {
        self.detail = detail;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.halt_tol >= 0.0) {
            return Err(Error::InvalidArgument("halt_tol must be nonnegative".into()));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidArgument("step_size must be positive".into()));
        }
        Ok(())
    }
}

/// Iteration history of one solver run.
///
/// `objectives[n] = 1/2 ||y - A x^n||^2` and `residual_norms[n] = ||y - A x^n||`
/// for `n = 0..=iterations()`. In [`TraceDetail::Full`] mode `iterates` and
/// `supports` are indexed the same way; in light mode they hold only the
/// final entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub iterates: Vec<Signal>,
    pub objectives: Vec<f64>,
    pub supports: Vec<SupportSet>,
    pub residual_norms: Vec<f64>,
    pub detail: TraceDetail,
    /// A least-squares step needed a ridge to factorize.
    pub regularized: bool,
    /// The iteration overflowed and was stopped at the last finite iterate.
    pub diverged: bool,
}

impl SolverTrace {
    fn new(detail: TraceDetail) -> Self {
        Self {
            iterates: Vec::new(),
            objectives: Vec::new(),
            supports: Vec::new(),
            residual_norms: Vec::new(),
            detail,
            regularized: false,
            diverged: false,
        }
    }

    /// Number of updates performed (the trace holds one more state).
    pub fn iterations(&self) -> usize {
        self.objectives.len().saturating_sub(1)
    }

    pub fn final_iterate(&self) -> &Signal {
        self.iterates.last().expect("trace holds at least x^0")
    }

    pub fn final_support(&self) -> &SupportSet {
        self.supports.last().expect("trace holds at least x^0")
    }

    pub(crate) fn require_full(&self, what: &str) -> Result<()> {
        if self.detail == TraceDetail::Full {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "{what} needs a trace recorded with full detail"
            )))
        }
    }

    /// Appends state `x` whose residual `y - A x` is `residual`.
    fn push(&mut self, x: Signal, residual: &[f64]) {
        let rn = crate::linalg::norm2(residual);
        self.objectives.push(0.5 * rn * rn);
        self.residual_norms.push(rn);
        let support = support_of(&x);
        if self.detail == TraceDetail::Light {
            self.iterates.clear();
            self.supports.clear();
        }
        self.iterates.push(x);
        self.supports.push(support);
    }
}

pub(crate) fn check_problem(a: &SensingMatrix, y: &MeasurementVector) -> Result<()> {
    check_len("measurements vs matrix rows", y.len(), a.rows())
}

fn residual(a: &SensingMatrix, y: &MeasurementVector, x: &[f64]) -> Vec<f64> {
    a.apply_slice(x)
        .iter()
        .zip(y.as_slice())
        .map(|(ax, yi)| yi - ax)
        .collect()
}

/// Iterative hard thresholding with sparsity `s`.
pub fn iht(a: &SensingMatrix, y: &MeasurementVector, s: usize, cfg: &SolverConfig) -> Result<SolverTrace> {
    projected_gradient(a, y, Projection::Hard(s), cfg)
}

/// Iterative hard weighted thresholding: the IHT loop with the projection
/// onto `{x : ||x||_{w,0} <= s}` selected by `cfg.projection`.
pub fn ihwt(
    a: &SensingMatrix,
    y: &MeasurementVector,
    w: &WeightVector,
    s: SupportBudget,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    projected_gradient(
        a,
        y,
        Projection::Weighted {
            weights: w,
            budget: s,
            mode: cfg.projection,
        },
        cfg,
    )
}

/// The shared loop behind [`iht`] and [`ihwt`].
pub fn projected_gradient(
    a: &SensingMatrix,
    y: &MeasurementVector,
    projection: Projection<'_>,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    check_problem(a, y)?;
    let n = a.cols();
    projection.validate(n)?;

    let mut x = match &cfg.initial {
        Some(x0) => {
            check_len("initial iterate", x0.len(), n)?;
            x0.clone()
        }
        None => Signal::zeros(n),
    };
    let mut trace = SolverTrace::new(cfg.detail);
    let mut r = residual(a, y, x.as_slice());
    trace.push(x.clone(), &r);

    for _ in 0..cfg.max_iters {
        let grad = a.adjoint_slice(&r);
        let stepped: Vec<f64> = x
            .as_slice()
            .iter()
            .zip(&grad)
            .map(|(xi, gi)| xi + cfg.step_size * gi)
            .collect();
        if stepped.iter().any(|v| !v.is_finite()) {
            trace.diverged = true;
            break;
        }
        let next = projection.apply(&Signal::from_vec_unchecked(stepped))?;
        let next_r = residual(a, y, next.as_slice());
        let rn = crate::linalg::norm2(&next_r);
        if !(rn * rn).is_finite() {
            trace.diverged = true;
            break;
        }
        let change = distance(next.as_slice(), x.as_slice());
        x = next;
        r = next_r;
        trace.push(x.clone(), &r);
        if change <= cfg.halt_tol {
            break;
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{gaussian_matrix, MatrixScaling};
    use crate::sparsity::weighted_l0;

    fn sig(v: &[f64]) -> Signal {
        Signal::new(v.to_vec()).unwrap()
    }

    fn meas(v: &[f64]) -> MeasurementVector {
        MeasurementVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn iht_identity_converges_in_one_step() {
        let a = SensingMatrix::identity(4);
        let y = meas(&[0.0, 3.0, 0.0, -1.0]);
        let trace = iht(&a, &y, 2, &SolverConfig::default()).unwrap();
        assert_eq!(trace.iterates[1].as_slice(), y.as_slice());
        assert_eq!(trace.final_iterate().as_slice(), y.as_slice());
        assert_eq!(trace.iterations(), 2);
    }

    #[test]
    fn iht_identity_keeps_largest() {
        let a = SensingMatrix::identity(3);
        let y = meas(&[5.0, 3.0, 1.0]);
        let trace = iht(&a, &y, 1, &SolverConfig::default()).unwrap();
        for x in &trace.iterates[1..] {
            assert_eq!(x, &sig(&[5.0, 0.0, 0.0]));
        }
    }

    #[test]
    fn ihwt_identity_toy_projection() {
        let a = SensingMatrix::identity(3);
        let y = meas(&[9.0, 9.0, 10.0]);
        let w = WeightVector::new(vec![1.0, 2f64.sqrt(), 3f64.sqrt()]).unwrap();
        let cfg = SolverConfig::default().with_projection(ProjectionMode::ExactDp);
        let trace = ihwt(&a, &y, &w, SupportBudget::from(3usize), &cfg).unwrap();
        assert_eq!(trace.iterates[1], sig(&[9.0, 9.0, 0.0]));
    }

    #[test]
    fn ihwt_rejects_dp_with_non_integer_squares() {
        let a = SensingMatrix::identity(2);
        let w = WeightVector::new(vec![1.0, 1.5]).unwrap();
        let cfg = SolverConfig::default().with_projection(ProjectionMode::ExactDp);
        assert!(matches!(
            ihwt(&a, &meas(&[1.0, 1.0]), &w, SupportBudget::from(2usize), &cfg),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn config_validation() {
        let a = SensingMatrix::identity(2);
        let y = meas(&[1.0, 1.0]);
        let cfg = SolverConfig {
            max_iters: 0,
            ..SolverConfig::default()
        };
        assert!(iht(&a, &y, 1, &cfg).is_err());
        let cfg = SolverConfig {
            step_size: 0.0,
            ..SolverConfig::default()
        };
        assert!(iht(&a, &y, 1, &cfg).is_err());
        assert!(iht(&a, &meas(&[1.0]), 1, &SolverConfig::default()).is_err());
    }

    #[test]
    fn divergence_is_flagged_not_propagated() {
        let a = SensingMatrix::identity(2).scaled(10.0);
        let y = meas(&[1.0, 1.0]);
        let cfg = SolverConfig {
            max_iters: 2000,
            ..SolverConfig::default()
        };
        let trace = iht(&a, &y, 2, &cfg).unwrap();
        assert!(trace.diverged);
        assert!(trace.objectives.iter().all(|f| f.is_finite()));
    }

    #[test]
    fn light_trace_keeps_final_only() {
        let a = gaussian_matrix(20, 30, 1, MatrixScaling::Spectral(0.9)).unwrap();
        let y = a.apply(&sig(&{
            let mut v = vec![0.0; 30];
            v[3] = 1.0;
            v
        })).unwrap();
        let full = iht(&a, &y, 2, &SolverConfig::default()).unwrap();
        let light = iht(&a, &y, 2, &SolverConfig::default().with_detail(TraceDetail::Light)).unwrap();
        assert_eq!(light.iterates.len(), 1);
        assert_eq!(light.final_iterate(), full.final_iterate());
        assert_eq!(light.objectives, full.objectives);
    }

    #[test]
    fn ihwt_iterates_are_feasible() {
        let a = gaussian_matrix(30, 60, 5, MatrixScaling::Rip).unwrap();
        let w = WeightVector::sqrt_index(60);
        let x = crate::signal_models::power_law_signal(
            &crate::signal_models::PowerLawParams::new(3, 1, 60).unwrap(),
        );
        let y = a.apply(&x).unwrap();
        let s = SupportBudget::from(40usize);
        for mode in [ProjectionMode::ExactDp, ProjectionMode::Surrogate] {
            let cfg = SolverConfig::default().with_projection(mode);
            let trace = ihwt(&a, &y, &w, s, &cfg).unwrap();
            for it in &trace.iterates {
                assert!(s.admits(weighted_l0(it, &w).unwrap()));
            }
        }
    }

    #[test]
    fn unit_weight_ihwt_equals_iht() {
        for seed in 0..10 {
            let a = gaussian_matrix(32, 64, seed, MatrixScaling::Rip).unwrap();
            let x = crate::signal_models::power_law_signal(
                &crate::signal_models::PowerLawParams::new(2, 1, 64).unwrap(),
            );
            let y = a.apply(&crate::signal_models::sparse_truncate(&x, 6).unwrap()).unwrap();
            let cfg = SolverConfig {
                max_iters: 100,
                ..SolverConfig::default()
            };
            let reference = iht(&a, &y, 6, &cfg).unwrap();
            for mode in [ProjectionMode::ExactDp, ProjectionMode::Surrogate] {
                let trace = ihwt(&a, &y, &WeightVector::uniform(64), SupportBudget::from(6usize), &cfg.clone().with_projection(mode)).unwrap();
                assert_eq!(trace, reference);
            }
        }
    }

    #[test]
    fn gradient_step_matches_finite_differences() {
        let a = gaussian_matrix(12, 20, 9, MatrixScaling::Rip).unwrap();
        let y = crate::signal_models::gaussian_noise(12, 1.0, 4).unwrap();
        let trace = iht(&a, &y, 5, &SolverConfig { max_iters: 5, ..SolverConfig::default() }).unwrap();
        let f = |x: &[f64]| {
            let r = residual(&a, &y, x);
            0.5 * crate::linalg::dot(&r, &r)
        };
        for x in &trace.iterates {
            let step = a.adjoint_slice(&residual(&a, &y, x.as_slice()));
            for j in 0..20 {
                let h = 1e-6;
                let mut p = x.as_slice().to_vec();
                let mut m = p.clone();
                p[j] += h;
                m[j] -= h;
                let fd = -(f(&p) - f(&m)) / (2.0 * h);
                assert!((fd - step[j]).abs() <= 1e-6 * step[j].abs().max(1.0), "{fd} vs {}", step[j]);
            }
        }
    }
}
