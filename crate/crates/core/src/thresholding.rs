//! Projections onto sparse and weighted sparse signals.
//!
//! * [`hard_threshold`] keeps the `s` largest magnitudes.
//! * [`exact_weighted_threshold`] returns a best approximation among signals
//!   with `||z||_{w,0} <= s`. Keeping index set `S` loses `sum_{j not in S} x_j^2`,
//!   so the projection maximizes `sum_{j in S} x_j^2` subject to
//!   `sum_{j in S} w_j^2 <= s`: a 0/1 knapsack with item values `x_j^2` and
//!   item sizes `w_j^2`. For integer `w_j^2` a dynamic program solves it
//!   exactly in `O(N s)`; small instances can also be enumerated.
//! * [`surrogate_weighted_threshold`] is the cheap heuristic: rank atoms by
//!   `|x_j| / w_j` and fill the budget greedily.
//!
//! Every operator breaks ties toward the lowest index, so all of them are
//! deterministic and agree exactly when the weights are uniform.

use std::cmp::Ordering;

use crate::combinatorics::{enumerate_supports, SupportBudget, MAX_ENUMERATION_N};
use crate::error::{check_len, Error, Result};
use crate::sparsity::{restrict, Signal, SupportSet, WeightVector};

/// Which weighted projection to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectionMode {
    /// Knapsack dynamic program; needs integer squared weights.
    ExactDp,
    /// Exhaustive search; needs `N <= 25`.
    ExactEnum,
    /// Ratio-sorted greedy fill that skips atoms that do not fit.
    Surrogate,
    /// Ratio-sorted greedy fill that stops at the first atom that does not fit.
    SurrogatePrefixStop,
}

impl ProjectionMode {
    pub fn name(self) -> &'static str {
        match self {
            ProjectionMode::ExactDp => "exact_dp",
            ProjectionMode::ExactEnum => "exact_enum",
            ProjectionMode::Surrogate => "surrogate",
            ProjectionMode::SurrogatePrefixStop => "surrogate_stop",
        }
    }
}

impl std::str::FromStr for ProjectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact_dp" | "exact-dp" | "exact" | "dp" => Ok(ProjectionMode::ExactDp),
            "exact_enum" | "exact-enum" | "enum" => Ok(ProjectionMode::ExactEnum),
            "surrogate" => Ok(ProjectionMode::Surrogate),
            "surrogate_stop" | "surrogate-stop" => Ok(ProjectionMode::SurrogatePrefixStop),
            other => Err(Error::InvalidArgument(format!(
                "unknown projection mode '{other}'"
            ))),
        }
    }
}

/// Greedy admission rule for the surrogate projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurrogateRule {
    /// An atom that does not fit is skipped and scanning continues.
    SkipNonFitting,
    /// Scanning stops at the first atom that does not fit.
    StopAtFirstMiss,
}

/// Indices sorted by `key` descending, ties by lower index.
fn ranked_indices(n: usize, key: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| match key(b).total_cmp(&key(a)) {
        Ordering::Equal => a.cmp(&b),
        ord => ord,
    });
    idx
}

fn keep_top(x: &Signal, k: usize) -> Signal {
    let mut keep = ranked_indices(x.len(), |j| x[j].abs());
    keep.truncate(k);
    keep.sort_unstable();
    restrict(x, &SupportSet::from_sorted_unchecked(keep)).expect("indices in range")
}

/// Keeps the `s` entries of largest magnitude and zeroes the rest.
pub fn hard_threshold(x: &Signal, s: usize) -> Result<Signal> {
    if s > x.len() {
        return Err(Error::InvalidArgument(format!(
            "sparsity {s} exceeds signal length {}",
            x.len()
        )));
    }
    Ok(keep_top(x, s))
}

/// A best weighted `s`-sparse approximation of `x`.
///
/// Among supports with equal captured energy the lexicographically smallest
/// one is returned. `mode` must be [`ProjectionMode::ExactDp`] or
/// [`ProjectionMode::ExactEnum`].
pub fn exact_weighted_threshold(
    x: &Signal,
    w: &WeightVector,
    s: SupportBudget,
    mode: ProjectionMode,
) -> Result<Signal> {
    check_len("signal vs weights", x.len(), w.len())?;
    let support = match mode {
        ProjectionMode::ExactDp => knapsack_support(x, w, s)?,
        ProjectionMode::ExactEnum => enumerated_support(x, w, s)?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "{} is not an exact projection mode",
                other.name()
            )))
        }
    };
    restrict(x, &support)
}

fn knapsack_support(x: &Signal, w: &WeightVector, s: SupportBudget) -> Result<SupportSet> {
    let costs = w.integer_squares().ok_or_else(|| {
        Error::Unsupported("exact_dp projection requires integer squared weights".into())
    })?;
    let n = x.len();
    let total: u64 = costs.iter().sum();
    let cap = s.capacity().min(total) as usize;

    // Equal weights: an exchange argument shows the top-k values are optimal.
    if w.is_constant() {
        let k = (cap as u64 / costs[0]) as usize;
        let mut keep = ranked_indices(n, |j| x[j].abs());
        keep.truncate(k.min(n));
        keep.sort_unstable();
        return Ok(SupportSet::from_sorted_unchecked(keep));
    }

    // best[j * width + c]: most energy from items j.. with capacity c
    let width = cap + 1;
    let mut best = vec![0.0f64; (n + 1) * width];
    for j in (0..n).rev() {
        let value = x[j] * x[j];
        let cost = costs[j] as usize;
        for c in 0..width {
            let skip = best[(j + 1) * width + c];
            best[j * width + c] = if cost <= c {
                let take = value + best[(j + 1) * width + c - cost];
                if take >= skip {
                    take
                } else {
                    skip
                }
            } else {
                skip
            };
        }
    }

    // Walking forward and taking every nonzero item that attains the optimum
    // yields the lexicographically smallest optimal support.
    let mut chosen = Vec::new();
    let mut c = cap;
    for j in 0..n {
        let cost = costs[j] as usize;
        if x[j] == 0.0 || cost > c {
            continue;
        }
        let take = x[j] * x[j] + best[(j + 1) * width + c - cost];
        if take == best[j * width + c] {
            chosen.push(j);
            c -= cost;
        }
    }
    Ok(SupportSet::from_sorted_unchecked(chosen))
}

fn enumerated_support(x: &Signal, w: &WeightVector, s: SupportBudget) -> Result<SupportSet> {
    let n = x.len();
    if n > MAX_ENUMERATION_N {
        return Err(Error::Unsupported(format!(
            "exact_enum projection needs N <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let mut best = SupportSet::empty();
    let mut best_value = 0.0;
    for support in enumerate_supports(w, s, n)? {
        let value = captured_energy(x, &support);
        if value > best_value {
            best_value = value;
            best = support;
        }
    }
    Ok(best)
}

/// `sum_{j in S} x_j^2`, summed in index order.
pub fn captured_energy(x: &Signal, support: &SupportSet) -> f64 {
    support.indices().iter().map(|&j| x[j] * x[j]).sum()
}

/// Ratio-sorted greedy weighted thresholding with the skip rule.
pub fn surrogate_weighted_threshold(
    x: &Signal,
    w: &WeightVector,
    s: SupportBudget,
) -> Result<Signal> {
    surrogate_weighted_threshold_with(x, w, s, SurrogateRule::SkipNonFitting)
}

/// Ranks atoms by `|x_j| / w_j` (descending, ties by lower index) and admits
/// them while the running weighted cardinality stays within `s`.
pub fn surrogate_weighted_threshold_with(
    x: &Signal,
    w: &WeightVector,
    s: SupportBudget,
    rule: SurrogateRule,
) -> Result<Signal> {
    check_len("signal vs weights", x.len(), w.len())?;
    let order = ranked_indices(x.len(), |j| x[j].abs() / w[j]);
    let mut used = 0.0;
    let mut keep = Vec::new();
    for j in order {
        if x[j] == 0.0 {
            break;
        }
        let cost = w.squared(j);
        if s.admits(used + cost) {
            used += cost;
            keep.push(j);
        } else if rule == SurrogateRule::StopAtFirstMiss {
            break;
        }
    }
    keep.sort_unstable();
    restrict(x, &SupportSet::from_sorted_unchecked(keep))
}

/// `||x - z||_2`.
pub fn projection_error(x: &Signal, z: &Signal) -> Result<f64> {
    x.distance(z)
}

/// A projection operator bound to its parameters, as used inside the solvers.
#[derive(Debug, Clone, Copy)]
pub enum Projection<'a> {
    /// Unweighted hard thresholding to `s` entries.
    Hard(usize),
    Weighted {
        weights: &'a WeightVector,
        budget: SupportBudget,
        mode: ProjectionMode,
    },
}

impl Projection<'_> {
    pub fn apply(&self, x: &Signal) -> Result<Signal> {
        match *self {
            Projection::Hard(s) => hard_threshold(x, s),
            Projection::Weighted {
                weights,
                budget,
                mode,
            } => match mode {
                ProjectionMode::ExactDp | ProjectionMode::ExactEnum => {
                    exact_weighted_threshold(x, weights, budget, mode)
                }
                ProjectionMode::Surrogate => surrogate_weighted_threshold(x, weights, budget),
                ProjectionMode::SurrogatePrefixStop => surrogate_weighted_threshold_with(
                    x,
                    weights,
                    budget,
                    SurrogateRule::StopAtFirstMiss,
                ),
            },
        }
    }

    /// Checks mode preconditions once, before an iteration starts.
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Projection::Hard(s) => {
                if s > n {
                    return Err(Error::InvalidArgument(format!(
                        "sparsity {s} exceeds signal length {n}"
                    )));
                }
            }
            Projection::Weighted { weights, mode, .. } => {
                check_len("weights", weights.len(), n)?;
                match mode {
                    ProjectionMode::ExactDp if weights.integer_squares().is_none() => {
                        return Err(Error::Unsupported(
                            "exact_dp projection requires integer squared weights".into(),
                        ))
                    }
                    ProjectionMode::ExactEnum if n > MAX_ENUMERATION_N => {
                        return Err(Error::Unsupported(format!(
                            "exact_enum projection needs N <= {MAX_ENUMERATION_N}, got {n}"
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsity::{support_of, weighted_l0};

    fn sig(v: &[f64]) -> Signal {
        Signal::new(v.to_vec()).unwrap()
    }

    fn budget(s: f64) -> SupportBudget {
        SupportBudget::new(s).unwrap()
    }

    fn toy_weights() -> WeightVector {
        WeightVector::new(vec![1.0, 2f64.sqrt(), 3f64.sqrt()]).unwrap()
    }

    fn mismatch_signal() -> Signal {
        let mut v = vec![0.0; 100];
        v[0] = 10.0;
        v[99] = 99.0;
        sig(&v)
    }

    #[test]
    fn hard_threshold_examples() {
        assert_eq!(hard_threshold(&sig(&[3.0, -5.0, 1.0]), 1).unwrap(), sig(&[0.0, -5.0, 0.0]));
        assert_eq!(hard_threshold(&sig(&[1.0, 2.0, 3.0]), 3).unwrap(), sig(&[1.0, 2.0, 3.0]));
        assert_eq!(hard_threshold(&sig(&[2.0, 2.0, 1.0]), 1).unwrap(), sig(&[2.0, 0.0, 0.0]));
        assert!(hard_threshold(&sig(&[1.0]), 2).is_err());
    }

    #[test]
    fn exact_beats_sorting_on_toy_example() {
        let x = sig(&[9.0, 9.0, 10.0]);
        for mode in [ProjectionMode::ExactDp, ProjectionMode::ExactEnum] {
            let z = exact_weighted_threshold(&x, &toy_weights(), budget(3.0), mode).unwrap();
            assert_eq!(z, sig(&[9.0, 9.0, 0.0]));
            assert_eq!(projection_error(&x, &z).unwrap(), 10.0);
        }
        let sorted = sig(&[0.0, 0.0, 10.0]);
        let naive = projection_error(&x, &sorted).unwrap();
        assert!((naive - 9.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(10.0 < naive);
    }

    #[test]
    fn mismatch_example() {
        let x = mismatch_signal();
        let w = WeightVector::sqrt_index(100);
        let exact = exact_weighted_threshold(&x, &w, budget(100.0), ProjectionMode::ExactDp).unwrap();
        let mut expected = vec![0.0; 100];
        expected[99] = 99.0;
        assert_eq!(exact, sig(&expected));

        let surrogate = surrogate_weighted_threshold(&x, &w, budget(100.0)).unwrap();
        let mut expected = vec![0.0; 100];
        expected[0] = 10.0;
        assert_eq!(surrogate, sig(&expected));
    }

    #[test]
    fn enum_mode_refuses_large_signals() {
        let x = Signal::zeros(30);
        let w = WeightVector::uniform(30);
        assert!(matches!(
            exact_weighted_threshold(&x, &w, budget(3.0), ProjectionMode::ExactEnum),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn dp_mode_refuses_non_integer_squares() {
        let x = sig(&[1.0, 2.0]);
        let w = WeightVector::new(vec![1.0, 1.5]).unwrap();
        assert!(matches!(
            exact_weighted_threshold(&x, &w, budget(3.0), ProjectionMode::ExactDp),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn prefix_stop_differs_from_skip() {
        // ratios: 10/1, 9/3, 2/1 ; sizes 1, 9, 1 ; budget 3
        let x = sig(&[10.0, 9.0, 2.0]);
        let w = WeightVector::new(vec![1.0, 3.0, 1.0]).unwrap();
        let skip = surrogate_weighted_threshold(&x, &w, budget(3.0)).unwrap();
        assert_eq!(skip, sig(&[10.0, 0.0, 2.0]));
        let stop =
            surrogate_weighted_threshold_with(&x, &w, budget(3.0), SurrogateRule::StopAtFirstMiss)
                .unwrap();
        assert_eq!(stop, sig(&[10.0, 0.0, 0.0]));
    }

    #[test]
    fn zero_budget_gives_zero_signal() {
        let x = sig(&[1.0, 2.0, 3.0]);
        let w = toy_weights();
        for mode in [ProjectionMode::ExactDp, ProjectionMode::ExactEnum] {
            assert_eq!(exact_weighted_threshold(&x, &w, budget(0.0), mode).unwrap(), Signal::zeros(3));
        }
        assert_eq!(surrogate_weighted_threshold(&x, &w, budget(0.5)).unwrap(), Signal::zeros(3));
    }

    #[test]
    fn monotone_signals_surrogate_is_exact() {
        use crate::signal_models::{power_law_signal, PowerLawParams};
        for n in 2..=20usize {
            for (a, b) in [(1, 1), (3, 2), (10, 3), (7, 1)] {
                let x = power_law_signal(&PowerLawParams::new(a, b, n).unwrap());
                let w = WeightVector::sqrt_index(n);
                for s in [1.0, 3.0, 6.0, 10.0, 17.5] {
                    let exact = exact_weighted_threshold(&x, &w, budget(s), ProjectionMode::ExactEnum).unwrap();
                    let sur = surrogate_weighted_threshold(&x, &w, budget(s)).unwrap();
                    assert_eq!(exact, sur, "n={n} a={a} b={b} s={s}");
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn instance() -> impl Strategy<Value = (Signal, WeightVector, f64)> {
            (1usize..=12).prop_flat_map(|n| {
                (
                    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => -10.0f64..10.0], n),
                    prop::collection::vec(1u32..=10, n),
                    0.0f64..30.0,
                )
                    .prop_map(|(x, sq, s)| {
                        (
                            Signal::new(x).unwrap(),
                            WeightVector::new(sq.iter().map(|&c| (c as f64).sqrt()).collect()).unwrap(),
                            s,
                        )
                    })
            })
        }

        proptest! {
            #[test]
            fn dp_and_enum_agree_and_beat_surrogate((x, w, s) in instance()) {
                let b = SupportBudget::new(s).unwrap();
                let dp = exact_weighted_threshold(&x, &w, b, ProjectionMode::ExactDp).unwrap();
                let en = exact_weighted_threshold(&x, &w, b, ProjectionMode::ExactEnum).unwrap();
                let sur = surrogate_weighted_threshold(&x, &w, b).unwrap();
                prop_assert_eq!(captured_energy(&x, &support_of(&dp)), captured_energy(&x, &support_of(&en)));
                prop_assert!(projection_error(&x, &dp).unwrap() <= projection_error(&x, &sur).unwrap());
            }

            #[test]
            fn outputs_are_feasible_selections((x, w, s) in instance()) {
                let b = SupportBudget::new(s).unwrap();
                for mode in [ProjectionMode::ExactDp, ProjectionMode::ExactEnum, ProjectionMode::Surrogate, ProjectionMode::SurrogatePrefixStop] {
                    let p = Projection::Weighted { weights: &w, budget: b, mode };
                    let z = p.apply(&x).unwrap();
                    prop_assert!(b.admits(weighted_l0(&z, &w).unwrap()));
                    for j in 0..x.len() {
                        prop_assert!(z[j] == 0.0 || z[j] == x[j]);
                    }
                    prop_assert_eq!(p.apply(&z).unwrap(), z);
                }
            }

            #[test]
            fn unit_weights_reduce_to_hard_threshold(
                x in prop::collection::vec(-5.0f64..5.0, 1..30),
                frac in 0.0f64..1.0,
            ) {
                let n = x.len();
                let s = ((n as f64) * frac) as usize;
                let x = Signal::new(x).unwrap();
                let w = WeightVector::uniform(n);
                let hard = hard_threshold(&x, s).unwrap();
                prop_assert_eq!(&exact_weighted_threshold(&x, &w, SupportBudget::from(s), ProjectionMode::ExactDp).unwrap(), &hard);
                prop_assert_eq!(&surrogate_weighted_threshold(&x, &w, SupportBudget::from(s)).unwrap(), &hard);
                prop_assert_eq!(hard_threshold(&hard, s).unwrap(), hard);
            }
        }
    }
}
