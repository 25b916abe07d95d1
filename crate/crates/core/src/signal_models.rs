//! Power-law test signals, the block weight construction and Gaussian noise.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::combinatorics::SupportBudget;
use crate::error::{check_len, Error, Result};
use crate::sparsity::{MeasurementVector, Signal, SupportSet, WeightVector};
use crate::thresholding::hard_threshold;

/// Parameters of `x(i) = a / i^b`, `i = 1..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PowerLawParams {
    pub amplitude: u32,
    pub exponent: u32,
    pub len: usize,
}

impl PowerLawParams {
    pub fn new(amplitude: u32, exponent: u32, len: usize) -> Result<Self> {
        if amplitude < 1 || exponent < 1 {
            return Err(Error::InvalidArgument(format!(
                "power law needs a >= 1 and b >= 1, got a={amplitude}, b={exponent}"
            )));
        }
        Ok(Self {
            amplitude,
            exponent,
            len,
        })
    }
}

/// `x(i) = a / i^b` with the 1-based index, so `x(1) = a` is the largest entry.
pub fn power_law_signal(p: &PowerLawParams) -> Signal {
    let a = p.amplitude as f64;
    Signal::from_vec_unchecked(
        (1..=p.len)
            .map(|i| a / (i as f64).powi(p.exponent as i32))
            .collect(),
    )
}

/// Best `s`-term approximation; the leading `s` entries for a decreasing signal.
pub fn sparse_truncate(x: &Signal, s: usize) -> Result<Signal> {
    hard_threshold(x, s)
}

/// Weights 1 on the first `s` atoms, 3 on the next `s` and 10 on the rest.
pub fn block_weights(n: usize, s: usize) -> Result<WeightVector> {
    if 2 * s >= n {
        return Err(Error::InvalidArgument(format!(
            "block weights need 2s < N, got s={s}, N={n}"
        )));
    }
    WeightVector::new(
        (0..n)
            .map(|j| {
                if j < s {
                    1.0
                } else if j < 2 * s {
                    3.0
                } else {
                    10.0
                }
            })
            .collect(),
    )
}

/// Best weighted `s`-sparse approximation of a signal whose magnitudes are
/// nonincreasing, under nondecreasing weights: the longest prefix that fits.
///
/// Fails with [`Error::InvalidArgument`] when either monotonicity
/// requirement does not hold; use the exact projection then.
pub fn best_ws_prefix(x: &Signal, w: &WeightVector, s: SupportBudget) -> Result<Signal> {
    check_len("signal vs weights", x.len(), w.len())?;
    let xs = x.as_slice();
    if xs.windows(2).any(|p| p[1].abs() > p[0].abs()) {
        return Err(Error::InvalidArgument(
            "prefix approximation needs nonincreasing |x|".into(),
        ));
    }
    if w.as_slice().windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::InvalidArgument(
            "prefix approximation needs nondecreasing weights".into(),
        ));
    }
    let k = prefix_length(w, s);
    let mut out = xs.to_vec();
    out[k..].iter_mut().for_each(|v| *v = 0.0);
    Ok(Signal::from_vec_unchecked(out))
}

/// Largest `k` with `sum_{i < k} w_i^2 <= s`.
pub fn prefix_length(w: &WeightVector, s: SupportBudget) -> usize {
    let mut used = 0.0;
    for j in 0..w.len() {
        used += w.squared(j);
        if !s.admits(used) {
            return j;
        }
    }
    w.len()
}

/// Support of the first `k` atoms.
pub fn prefix_support(k: usize) -> SupportSet {
    SupportSet::new((0..k).collect(), k).expect("prefix indices are valid")
}

/// `m` i.i.d. `N(0, sigma^2)` samples, deterministic in `seed`.
pub fn gaussian_noise(m: usize, sigma: f64, seed: u64) -> Result<MeasurementVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_noise_with_rng(&mut rng, m, sigma)
}

pub fn gaussian_noise_with_rng<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    sigma: f64,
) -> Result<MeasurementVector> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise level must be finite and nonnegative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(MeasurementVector::zeros(m));
    }
    Ok(MeasurementVector::from_vec_unchecked(
        (0..m)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
    ))
}

/// Default amplitude range for random power laws.
pub const DEFAULT_AMPLITUDE_RANGE: RangeInclusive<u32> = 1..=10;
/// Default decay exponent range for random power laws.
pub const DEFAULT_EXPONENT_RANGE: RangeInclusive<u32> = 1..=3;

/// Uniform integer draws of the amplitude and exponent.
pub fn random_power_law_params<R: Rng + ?Sized>(
    rng: &mut R,
    len: usize,
    amplitude: RangeInclusive<u32>,
    exponent: RangeInclusive<u32>,
) -> Result<PowerLawParams> {
    if amplitude.is_empty() || exponent.is_empty() {
        return Err(Error::InvalidArgument("empty power-law parameter range".into()));
    }
    let a = rng.random_range(amplitude);
    let b = rng.random_range(exponent);
    PowerLawParams::new(a, b, len)
}
