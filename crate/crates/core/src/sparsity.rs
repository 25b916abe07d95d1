//! Domain types and the weighted sparsity functionals.
//!
//! A [`WeightVector`] assigns every atom a weight `w_j >= 1`. The weighted
//! sparsity of a signal is the sum of `w_j^2` over its support, so a heavily
//! weighted atom costs more of the sparsity budget than a lightly weighted
//! one. With all weights equal to one this is the ordinary count of nonzeros.
//!
//! Supports are detected with an exact comparison against `0.0`. Tolerance
//! based support detection belongs to the recovery metrics, not here.

use std::fmt;
use std::ops::Index;

use crate::error::{check_len, Error, Result};

/// Per-atom weights, every entry at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
}

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("weight vector is empty".into()));
        }
        if let Some((j, w)) = values
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 1.0)
        {
            return Err(Error::InvalidArgument(format!(
                "weight {} at index {j} is not a finite value >= 1",
                w
            )));
        }
        Ok(Self { values })
    }

    /// All weights equal to one: the unweighted case.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "weight vector length must be positive");
        Self {
            values: vec![1.0; n],
        }
    }

    /// `w_j = sqrt(j)` for the 1-based index `j = 1..=n`.
    pub fn sqrt_index(n: usize) -> Self {
        assert!(n >= 1, "weight vector length must be positive");
        Self {
            values: (1..=n).map(|j| (j as f64).sqrt()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// The cost `w_j^2` that atom `j` contributes to the weighted sparsity.
    #[inline]
    pub fn squared(&self, j: usize) -> f64 {
        self.values[j] * self.values[j]
    }

    /// `max_j w_j`.
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(1.0, f64::max)
    }

    /// True when every weight is the same value.
    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&w| w == self.values[0])
    }

    /// Squared weights rounded to integers, if every `w_j^2` lies within a
    /// relative `1e-7` of an integer.
    pub fn integer_squares(&self) -> Option<Vec<u64>> {
        self.values
            .iter()
            .map(|&w| {
                let sq = w * w;
                let r = sq.round();
                ((sq - r).abs() <= INTEGER_SQUARE_TOL * r.max(1.0)).then_some(r as u64)
            })
            .collect()
    }
}

/// Relative tolerance for treating a squared weight as an integer. Loose
/// enough for weights typed with eight decimals, e.g. `1.41421356`.
pub const INTEGER_SQUARE_TOL: f64 = 1e-7;

impl Index<usize> for WeightVector {
    type Output = f64;

    fn index(&self, j: usize) -> &f64 {
        &self.values[j]
    }
}

/// A dense real signal with finite entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Signal {
    values: Vec<f64>,
}

impl Signal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "signal entry {j} is not finite"
            )));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    /// Wraps values the caller already knows to be finite.
    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn norm2(&self) -> f64 {
        crate::linalg::norm2(&self.values)
    }

    pub fn count_nonzero(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    /// Euclidean distance to `other`.
    pub fn distance(&self, other: &Signal) -> Result<f64> {
        check_len("signal", other.len(), self.len())?;
        Ok(crate::linalg::distance(&self.values, &other.values))
    }
}

impl Index<usize> for Signal {
    type Output = f64;

    fn index(&self, j: usize) -> &f64 {
        &self.values[j]
    }
}

/// Measurements `y` (or a noise vector `e`) in the range of the sensing matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasurementVector {
    values: Vec<f64>,
}

impl MeasurementVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "measurement entry {i} is not finite"
            )));
        }
        Ok(Self { values })
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            values: vec![0.0; m],
        }
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn norm2(&self) -> f64 {
        crate::linalg::norm2(&self.values)
    }

    /// Entry-wise sum, used to form `y = Ax + e`.
    pub fn add(&self, other: &MeasurementVector) -> Result<MeasurementVector> {
        check_len("measurement", other.len(), self.len())?;
        Ok(Self::from_vec_unchecked(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }
}

/// A strictly increasing list of 0-based atom indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a support from arbitrary indices; they are sorted and checked
    /// for duplicates and bounds.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(
                "support contains duplicate indices".into(),
            ));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::Dimension(format!(
                    "support index {last} out of bounds for length {n}"
                )));
            }
        }
        Ok(Self { indices })
    }

    /// Caller guarantees the indices are strictly increasing.
    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.indices.iter().peekable(), other.indices.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x < y {
                        out.push(x);
                        a.next();
                    } else if y < x {
                        out.push(y);
                        b.next();
                    } else {
                        out.push(x);
                        a.next();
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        SupportSet { indices: out }
    }

    /// Indices in `0..n` not in this support.
    pub fn complement(&self, n: usize) -> SupportSet {
        SupportSet {
            indices: (0..n).filter(|j| !self.contains(*j)).collect(),
        }
    }

    fn check_bounds(&self, n: usize) -> Result<()> {
        match self.indices.last() {
            Some(&last) if last >= n => Err(Error::Dimension(format!(
                "support index {last} out of bounds for length {n}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SupportSet {
    /// Comma separated, 0-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, j) in self.indices.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{j}")?;
        }
        Ok(())
    }
}

/// `sum_{j: x_j != 0} w_j^2`.
pub fn weighted_l0(x: &Signal, w: &WeightVector) -> Result<f64> {
    check_len("signal vs weights", x.len(), w.len())?;
    Ok(compensated_sum(
        x.as_slice()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, _)| w.squared(j)),
    ))
}

/// `omega(S) = sum_{j in S} w_j^2`.
pub fn weighted_cardinality(support: &SupportSet, w: &WeightVector) -> Result<f64> {
    support.check_bounds(w.len())?;
    Ok(compensated_sum(support.indices.iter().map(|&j| w.squared(j))))
}

/// The weighted `p`-functional `sum_{j: x_j != 0} |x_j|^p w_j^{2-p}`.
///
/// No outer `p`-th root is taken: for `p = 1` this is the weighted l1 norm
/// used in the tail bounds, for `p = 2` it is the squared Euclidean norm.
pub fn weighted_lp(x: &Signal, w: &WeightVector, p: f64) -> Result<f64> {
    check_len("signal vs weights", x.len(), w.len())?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "weighted lp exponent must be positive, got {p}"
        )));
    }
    Ok(compensated_sum(
        x.as_slice()
            .iter()
            .zip(w.as_slice())
            .filter(|(&v, _)| v != 0.0)
            .map(|(&v, &wj)| {
                if p == 1.0 {
                    v.abs() * wj
                } else if p == 2.0 {
                    v * v
                } else {
                    v.abs().powf(p) * wj.powf(2.0 - p)
                }
            }),
    ))
}

/// Full-length signal equal to `x` on `support` and zero elsewhere.
pub fn restrict(x: &Signal, support: &SupportSet) -> Result<Signal> {
    support.check_bounds(x.len())?;
    let mut out = vec![0.0; x.len()];
    for &j in support.indices() {
        out[j] = x[j];
    }
    Ok(Signal::from_vec_unchecked(out))
}

/// Indices of the entries of `x` that are exactly nonzero.
pub fn support_of(x: &Signal) -> SupportSet {
    SupportSet::from_sorted_unchecked(
        x.as_slice()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, _)| j)
            .collect(),
    )
}

/// Neumaier compensated summation.
pub(crate) fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}
