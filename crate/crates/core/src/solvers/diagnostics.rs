//! Empirical checks of the convergence guarantees on recorded traces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{check_problem, residual, SolverTrace};
use crate::combinatorics::SupportBudget;
use crate::error::{check_len, Error, Result};
use crate::linalg::{distance, norm2};
use crate::sensing::{rip_constant, spectral_norm, SensingMatrix};
use crate::sparsity::{support_of, weighted_lp, MeasurementVector, Signal, WeightVector};

/// Relative tolerance of the descent checks, scaled by `f(x^0)`.
pub const DESCENT_REL_TOL: f64 = 1e-12;

/// `f(x) = 1/2 ||y - A x||^2`.
pub fn objective(a: &SensingMatrix, y: &MeasurementVector, x: &Signal) -> Result<f64> {
    check_problem(a, y)?;
    check_len("signal vs matrix columns", x.len(), a.cols())?;
    let r = norm2(&residual(a, y, x.as_slice()));
    Ok(0.5 * r * r)
}

/// The majorizer `g(x, z) = 1/2 ||y - A x||^2 - ||A (x - z)||^2 + ||x - z||^2`.
///
/// `g(x, x) = f(x)`, and `g(x, z) >= f(x)` whenever `||A||_2 < 1`.
pub fn mm_surrogate(
    a: &SensingMatrix,
    y: &MeasurementVector,
    x: &Signal,
    z: &Signal,
) -> Result<f64> {
    check_len("second point vs matrix columns", z.len(), a.cols())?;
    let f = objective(a, y, x)?;
    let d: Vec<f64> = x
        .as_slice()
        .iter()
        .zip(z.as_slice())
        .map(|(p, q)| p - q)
        .collect();
    let ad = norm2(&a.apply_slice(&d));
    let dn = norm2(&d);
    Ok(f - ad * ad + dn * dn)
}

/// `1/2 ||y - A x||^2 - 1/2 ||A (x - z)||^2 + 1/2 ||x - z||^2`, the majorizer
/// of `f` whose constrained minimizer in `x` is the unit-step thresholded
/// iterate. It differs from [`mm_surrogate`] in halving the last two terms.
pub fn balanced_mm_surrogate(
    a: &SensingMatrix,
    y: &MeasurementVector,
    x: &Signal,
    z: &Signal,
) -> Result<f64> {
    let f = objective(a, y, x)?;
    Ok(0.5 * (mm_surrogate(a, y, x, z)? - f) + f)
}

/// Outcome of [`descent_diagnostics`].
#[derive(Debug, Clone, PartialEq)]
pub struct DescentReport {
    /// `f(x^{n+1}) <= f(x^n)` for every `n`.
    pub objective_nonincreasing: bool,
    /// `f(x^{n+1}) <= g(x^{n+1}, x^n) <= f(x^n)` for every `n`, with `g` the
    /// [`balanced_mm_surrogate`].
    pub interleaving: bool,
    /// Every partial sum of `||x^{i+1} - x^i||^2` is within `summation_limit`.
    pub summation: bool,
    /// Largest `f(x^{n+1}) - f(x^n)`; zero or negative when descending.
    pub max_objective_increase: f64,
    /// Largest violation of either interleaving inequality.
    pub max_interleaving_violation: f64,
    /// The same quantity with [`mm_surrogate`] in place of the balanced form.
    /// Its upper inequality is not guaranteed and is reported only.
    pub max_literal_violation: f64,
    /// Partial sums `sum_{i<n} ||x^{i+1} - x^i||^2`.
    pub partial_sums: Vec<f64>,
    /// `f(x^0) / (1 - ||A||_2^2)`.
    pub summation_limit: f64,
    /// Smallest `||x^{n+1} - x^n||`; infinite for a single-state trace.
    pub min_step: f64,
    pub spectral_norm: f64,
    pub tolerance: f64,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.objective_nonincreasing && self.interleaving && self.summation
    }
}

/// Checks monotone descent of `f`, the interleaving with the majorizer and
/// the summability of squared steps on a full trace.
///
/// Needs `||A||_2 < 1`. The interleaving relies on each iterate minimizing
/// `g(., x^n)` over the constraint set, so traces from the surrogate
/// weighted projection are not expected to pass it.
pub fn descent_diagnostics(
    trace: &SolverTrace,
    a: &SensingMatrix,
    y: &MeasurementVector,
) -> Result<DescentReport> {
    trace.require_full("descent diagnostics")?;
    check_problem(a, y)?;
    let norm = spectral_norm(a, 1e-15)?;
    if norm >= 1.0 {
        return Err(Error::Precondition(format!(
            "descent checks need ||A||_2 < 1, got {norm}"
        )));
    }
    let states = &trace.iterates;
    let f: Vec<f64> = states
        .iter()
        .map(|x| objective(a, y, x))
        .collect::<Result<_>>()?;
    let f0 = f[0];
    let tolerance = DESCENT_REL_TOL * f0.max(f64::MIN_POSITIVE);
    let summation_limit = f0 / (1.0 - norm * norm);

    let mut max_increase = f64::NEG_INFINITY;
    let mut max_violation = f64::NEG_INFINITY;
    let mut max_literal = f64::NEG_INFINITY;
    let mut partial = 0.0;
    let mut partial_sums = Vec::with_capacity(states.len().saturating_sub(1));
    let mut min_step = f64::INFINITY;
    for n in 0..states.len().saturating_sub(1) {
        max_increase = max_increase.max(f[n + 1] - f[n]);
        let g = balanced_mm_surrogate(a, y, &states[n + 1], &states[n])?;
        max_violation = max_violation.max(f[n + 1] - g).max(g - f[n]);
        let literal = mm_surrogate(a, y, &states[n + 1], &states[n])?;
        max_literal = max_literal.max(f[n + 1] - literal).max(literal - f[n]);
        let step = distance(states[n + 1].as_slice(), states[n].as_slice());
        min_step = min_step.min(step);
        partial += step * step;
        partial_sums.push(partial);
    }
    if max_increase == f64::NEG_INFINITY {
        max_increase = 0.0;
        max_violation = 0.0;
        max_literal = 0.0;
    }
    let summation = partial_sums
        .iter()
        .all(|&p| p <= summation_limit + tolerance);

    Ok(DescentReport {
        objective_nonincreasing: max_increase <= tolerance,
        interleaving: max_violation <= tolerance,
        summation,
        max_objective_increase: max_increase,
        max_interleaving_violation: max_violation,
        max_literal_violation: max_literal,
        partial_sums,
        summation_limit,
        min_step,
        spectral_norm: norm,
        tolerance,
    })
}

/// Which error bound [`theorem_bound`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVariant {
    /// `2^{-n} ||x^s|| + ||x - x^s|| + 4.34 ||A x_{S^c} + e||`.
    General,
    /// `2^{-n} ||x^s|| + 6 (||x - x^s|| + (2/sqrt s) ||x - x^s||_{w,1} + ||e||)`;
    /// needs `s >= 2 max_j w_j^2`.
    WeightedL1,
    /// `2^{-n} ||x^s|| + 6 (||x - x^s|| + ||x - x^s||_1 / sqrt s + ||e||)`.
    Unweighted,
}

/// Per-iteration left and right sides of an error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// `||x - x^n||` for each state in the trace.
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub satisfied: bool,
    /// Named terms of the right-hand side.
    pub components: Vec<(&'static str, f64)>,
}

impl BoundReport {
    pub fn component(&self, name: &str) -> Option<f64> {
        self.components
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
    }
}

/// Largest `delta_{3s}` under which the bounds are claimed.
pub fn delta_threshold() -> f64 {
    1.0 / 32f64.sqrt()
}

/// Evaluates an error bound along a full trace of a solver run on
/// `y = A x_true + e`, where `x_best` is the best sparse approximation of
/// `x_true` used by the theorem.
///
/// `delta_3s` must be a certified restricted isometry constant of order
/// `3s` (weighted or not, matching the solver) below `1/sqrt(32)`;
/// otherwise the bound is not claimed and a precondition error is returned.
#[allow(clippy::too_many_arguments)]
pub fn theorem_bound(
    trace: &SolverTrace,
    a: &SensingMatrix,
    x_true: &Signal,
    x_best: &Signal,
    e: &MeasurementVector,
    delta_3s: f64,
    w: &WeightVector,
    s: SupportBudget,
    variant: BoundVariant,
) -> Result<BoundReport> {
    trace.require_full("theorem bound")?;
    check_problem(a, e)?;
    let n = a.cols();
    check_len("true signal", x_true.len(), n)?;
    check_len("best approximation", x_best.len(), n)?;
    check_len("weights", w.len(), n)?;
    if !(delta_3s >= 0.0 && delta_3s < delta_threshold()) {
        return Err(Error::Precondition(format!(
            "delta_3s = {delta_3s} is not below 1/sqrt(32)"
        )));
    }
    if variant == BoundVariant::WeightedL1 && s.value() < 2.0 * w.max() * w.max() {
        return Err(Error::Precondition(format!(
            "weighted l1 bound needs s >= 2 max w^2 = {}, got {}",
            2.0 * w.max() * w.max(),
            s.value()
        )));
    }
    if variant != BoundVariant::General && s.value() <= 0.0 {
        return Err(Error::Precondition("bound needs s > 0".into()));
    }

    let support = support_of(x_best);
    let tail: Vec<f64> = x_true
        .as_slice()
        .iter()
        .enumerate()
        .map(|(j, &v)| if support.contains(j) { 0.0 } else { v })
        .collect();
    let mut tail_meas = a.apply_slice(&tail);
    for (t, ei) in tail_meas.iter_mut().zip(e.as_slice()) {
        *t += ei;
    }
    let diff = Signal::from_vec_unchecked(
        x_true
            .as_slice()
            .iter()
            .zip(x_best.as_slice())
            .map(|(p, q)| p - q)
            .collect(),
    );
    let norm_best = x_best.norm2();
    let approx_err = diff.norm2();
    let tail_measurement = norm2(&tail_meas);
    let noise = e.norm2();
    let root_s = s.value().sqrt();

    let mut components = vec![
        ("best_norm", norm_best),
        ("approximation_error", approx_err),
        ("noise", noise),
    ];
    let floor = match variant {
        BoundVariant::General => {
            components.push(("tail_measurement", tail_measurement));
            approx_err + 4.34 * tail_measurement
        }
        BoundVariant::WeightedL1 => {
            let wl1 = weighted_lp(&diff, w, 1.0)?;
            components.push(("weighted_l1_error", wl1));
            6.0 * (approx_err + 2.0 / root_s * wl1 + noise)
        }
        BoundVariant::Unweighted => {
            let l1: f64 = diff.as_slice().iter().map(|v| v.abs()).sum();
            let eps = approx_err + l1 / root_s + noise;
            components.push(("l1_error", l1));
            components.push(("unrecoverable_energy", eps));
            6.0 * eps
        }
    };
    components.push(("floor", floor));

    let lhs: Vec<f64> = trace
        .iterates
        .iter()
        .map(|x| x_true.distance(x))
        .collect::<Result<_>>()?;
    let rhs: Vec<f64> = (0..lhs.len())
        .map(|k| 0.5f64.powi(k as i32) * norm_best + floor)
        .collect();
    let slack = 1e-12 * (norm_best + floor).max(f64::MIN_POSITIVE);
    let satisfied = lhs.iter().zip(&rhs).all(|(l, r)| *l <= r + slack);
    Ok(BoundReport {
        lhs,
        rhs,
        satisfied,
        components,
    })
}

/// `||x^s - x^{n+1}|| / ||x^s - x^n||` along a full trace. A zero
/// denominator gives 0 when the numerator also vanishes and infinity
/// otherwise.
pub fn contraction_ratios(trace: &SolverTrace, x_best: &Signal) -> Result<Vec<f64>> {
    trace.require_full("contraction ratios")?;
    let errs: Vec<f64> = trace
        .iterates
        .iter()
        .map(|x| x_best.distance(x))
        .collect::<Result<_>>()?;
    Ok(errs
        .windows(2)
        .map(|p| match (p[0] == 0.0, p[1] == 0.0) {
            (true, true) => 0.0,
            (true, false) => f64::INFINITY,
            _ => p[1] / p[0],
        })
        .collect())
}

/// Outcome of [`weighted_energy_bound_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBoundReport {
    pub trials: usize,
    /// Enumerated `delta_{w,s}`.
    pub delta: f64,
    pub violations: usize,
    /// `min(rhs - lhs)` over all trials.
    pub worst_margin: f64,
}

/// Tests `||A x|| <= sqrt(1 + delta_{w,s}) (||x|| + (2/sqrt s) ||x||_{w,1})`
/// on random dense and random sparse `x`, with `delta_{w,s}` computed by
/// enumeration. Needs `s >= 2 max_j w_j^2`.
pub fn weighted_energy_bound_check(
    a: &SensingMatrix,
    w: &WeightVector,
    s: SupportBudget,
    trials: usize,
    seed: u64,
) -> Result<EnergyBoundReport> {
    let n = a.cols();
    check_len("weights vs matrix columns", w.len(), n)?;
    if s.value() < 2.0 * w.max() * w.max() {
        return Err(Error::Precondition(format!(
            "energy bound needs s >= 2 max w^2 = {}, got {}",
            2.0 * w.max() * w.max(),
            s.value()
        )));
    }
    let delta = rip_constant(a, Some(w), s)?.delta;
    let factor = (1.0 + delta).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for t in 0..trials {
        let density = if t % 2 == 0 { 1.0 } else { rng.random_range(0.05..1.0) };
        let v: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(density) {
                    rng.sample(StandardNormal)
                } else {
                    0.0
                }
            })
            .collect();
        let x = Signal::from_vec_unchecked(v);
        let lhs = norm2(&a.apply_slice(x.as_slice()));
        let rhs = factor * (x.norm2() + 2.0 / s.value().sqrt() * weighted_lp(&x, w, 1.0)?);
        let margin = rhs - lhs;
        worst = worst.min(margin);
        if margin < -1e-12 * rhs.max(f64::MIN_POSITIVE) {
            violations += 1;
        }
    }
    Ok(EnergyBoundReport {
        trials,
        delta,
        violations,
        worst_margin: worst,
    })
}
