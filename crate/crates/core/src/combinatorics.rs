//! Counting and enumerating index sets that fit a weighted sparsity budget.
//!
//! With `w_j = sqrt(j)` an index set `I` has weighted cardinality
//! `sum_{j in I} j` (1-based), so sets of weighted cardinality exactly `s`
//! are the partitions of `s` into distinct parts. The counts grow far past
//! 64 bits, hence [`BigCount`].

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::sparsity::{SupportSet, WeightVector};

/// Relative slack used when testing `omega(I) <= s` in floating point.
pub const BUDGET_REL_TOL: f64 = 1e-12;

/// Largest instance [`enumerate_supports`] will walk.
pub const MAX_ENUMERATION_N: usize = 25;

/// A weighted sparsity budget `s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SupportBudget(f64);

impl SupportBudget {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s >= 0.0 {
            Ok(Self(s))
        } else {
            Err(Error::InvalidArgument(format!(
                "sparsity budget must be finite and nonnegative, got {s}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `total <= s`, up to [`BUDGET_REL_TOL`].
    #[inline]
    pub fn admits(self, total: f64) -> bool {
        total <= self.0 + BUDGET_REL_TOL * self.0.max(1.0)
    }

    /// Integer capacity `floor(s)`, with the same tolerance as [`Self::admits`].
    pub fn capacity(self) -> u64 {
        (self.0 + BUDGET_REL_TOL * self.0.max(1.0)).floor() as u64
    }
}

impl From<usize> for SupportBudget {
    fn from(s: usize) -> Self {
        Self(s as f64)
    }
}

impl fmt::Display for SupportBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An exact nonnegative count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigCount(BigUint);

impl BigCount {
    pub fn zero() -> Self {
        Self(BigUint::zero())
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        Self(BigUint::from(v))
    }
}

impl From<BigUint> for BigCount {
    fn from(v: BigUint) -> Self {
        Self(v)
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Whether [`count_supports`] counts sets with `omega(I) == s` or `<= s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    Exact,
    AtMost,
}

/// `P_w(s)`: the largest `|I|` with `omega(I) <= s`.
///
/// Taking the smallest squared weights first is optimal because every
/// weight is positive.
pub fn max_support_size(w: &WeightVector, s: SupportBudget) -> usize {
    let mut sq: Vec<f64> = (0..w.len()).map(|j| w.squared(j)).collect();
    sq.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut count = 0;
    for c in sq {
        if !s.admits(total + c) {
            break;
        }
        total += c;
        count += 1;
    }
    count
}

/// Number of index sets `I` of `0..N` with `omega(I) == s` or `omega(I) <= s`.
///
/// Subset-sum counting over the integer squared weights with exact big
/// integer accumulators, `O(N * s)` additions. The empty set is counted when
/// its weight, zero, satisfies the predicate. Fails with
/// [`Error::Unsupported`] if some `w_j^2` is not an integer.
pub fn count_supports(w: &WeightVector, s: SupportBudget, mode: CountMode) -> Result<BigCount> {
    let costs = w.integer_squares().ok_or_else(|| {
        Error::Unsupported("counting requires integer squared weights".into())
    })?;
    let cap = s.capacity();
    let cap_usize = usize::try_from(cap)
        .map_err(|_| Error::InvalidArgument(format!("budget {s} is too large to count")))?;
    let mut counts = vec![BigUint::zero(); cap_usize + 1];
    counts[0] = BigUint::one();
    for c in costs {
        let c = c as usize;
        if c > cap_usize {
            continue;
        }
        if c == 0 {
            // unreachable for weights >= 1
            continue;
        }
        for k in (c..=cap_usize).rev() {
            let (lo, hi) = counts.split_at_mut(k);
            if !lo[k - c].is_zero() {
                hi[0] += &lo[k - c];
            }
        }
    }
    let total = match mode {
        CountMode::Exact => {
            // integer weights can only sum to an integer budget
            if (s.value() - cap as f64).abs() > BUDGET_REL_TOL * s.value().max(1.0) {
                BigUint::zero()
            } else {
                counts.swap_remove(cap_usize)
            }
        }
        CountMode::AtMost => counts.iter().fold(BigUint::zero(), |acc, c| acc + c),
    };
    Ok(BigCount(total))
}

/// Number of partitions of `n` into distinct parts, computed through Euler's
/// identity as the number of partitions of `n` into odd parts.
///
/// This route shares no code with [`count_supports`] and serves as its
/// cross-check for `w_j = sqrt(j)`.
pub fn distinct_partition_count(n: usize) -> BigCount {
    let mut ways = vec![BigUint::zero(); n + 1];
    ways[0] = BigUint::one();
    for part in (1..=n).step_by(2) {
        for k in part..=n {
            let (lo, hi) = ways.split_at_mut(k);
            if !lo[k - part].is_zero() {
                hi[0] += &lo[k - part];
            }
        }
    }
    BigCount(ways.swap_remove(n))
}

/// Every `I` of `0..n_limit` with `omega(I) <= s`, each exactly once, in
/// lexicographic order of the sorted index lists (so `{}` comes first and
/// `{0, 1}` precedes `{1}`).
///
/// Depth-first with pruning of branches whose accumulated weight exceeds
/// the budget. Refuses `n_limit > 25`.
pub fn enumerate_supports(
    w: &WeightVector,
    s: SupportBudget,
    n_limit: usize,
) -> Result<SupportEnumerator> {
    if n_limit > MAX_ENUMERATION_N {
        return Err(Error::Refused(format!(
            "enumeration over {n_limit} atoms exceeds the limit of {MAX_ENUMERATION_N}"
        )));
    }
    if n_limit > w.len() {
        return Err(Error::Dimension(format!(
            "enumeration limit {n_limit} exceeds weight length {}",
            w.len()
        )));
    }
    Ok(SupportEnumerator {
        costs: (0..n_limit).map(|j| w.squared(j)).collect(),
        budget: s,
        stack: Vec::new(),
        partial: vec![0.0],
        started: false,
    })
}

/// Iterator returned by [`enumerate_supports`].
#[derive(Debug, Clone)]
pub struct SupportEnumerator {
    costs: Vec<f64>,
    budget: SupportBudget,
    stack: Vec<usize>,
    // partial[k] is the weight of the first k stacked indices
    partial: Vec<f64>,
    started: bool,
}

impl SupportEnumerator {
    /// Weighted cardinality of the set most recently yielded.
    pub fn current_weight(&self) -> f64 {
        *self.partial.last().unwrap_or(&0.0)
    }
}

impl Iterator for SupportEnumerator {
    type Item = SupportSet;

    fn next(&mut self) -> Option<SupportSet> {
        if !self.started {
            self.started = true;
            return Some(SupportSet::empty());
        }
        let n = self.costs.len();
        let mut start = self.stack.last().map_or(0, |&l| l + 1);
        loop {
            let acc = self.current_weight();
            if let Some(j) = (start..n).find(|&j| self.budget.admits(acc + self.costs[j])) {
                self.stack.push(j);
                self.partial.push(acc + self.costs[j]);
                return Some(SupportSet::from_sorted_unchecked(self.stack.clone()));
            }
            let last = self.stack.pop()?;
            self.partial.pop();
            start = last + 1;
        }
    }
}
