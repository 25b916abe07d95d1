//! Seeded Monte Carlo recovery experiments on power-law signals.
//!
//! Every trial draws a fresh Gaussian matrix and fresh power-law parameters
//! from its own generator, keyed by `(seed, sweep index, trial index)`, and
//! feeds the same `A`, `x` and `y` to every solver. Trials run on the rayon
//! pool and are reduced in index order, so results do not depend on the
//! number of threads.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::combinatorics::SupportBudget;
use crate::error::{Error, Result};
use crate::sensing::{gaussian_matrix_with_rng, MatrixScaling};
use crate::signal_models::{
    block_weights, gaussian_noise_with_rng, power_law_signal, random_power_law_params,
    sparse_truncate, DEFAULT_AMPLITUDE_RANGE, DEFAULT_EXPONENT_RANGE,
};
use crate::solvers::{cosamp, ihwt, iht, omp, SolverConfig, TraceDetail};
use crate::sparsity::{MeasurementVector, Signal};
use crate::thresholding::ProjectionMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolverKind {
    Ihwt,
    Iht,
    Cosamp,
    Omp,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::Ihwt,
        SolverKind::Iht,
        SolverKind::Cosamp,
        SolverKind::Omp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Ihwt => "ihwt",
            SolverKind::Iht => "iht",
            SolverKind::Cosamp => "cosamp",
            SolverKind::Omp => "omp",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ihwt" => Ok(SolverKind::Ihwt),
            "iht" => Ok(SolverKind::Iht),
            "cosamp" => Ok(SolverKind::Cosamp),
            "omp" => Ok(SolverKind::Omp),
            other => Err(Error::InvalidArgument(format!("unknown solver '{other}'"))),
        }
    }
}

/// The swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Sparsity,
    Measurements,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Sparsity => "s",
            SweepKind::Measurements => "m",
        }
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "s" | "sparsity" => Ok(SweepKind::Sparsity),
            "m" | "measurements" => Ok(SweepKind::Measurements),
            other => Err(Error::InvalidArgument(format!("unknown sweep '{other}'"))),
        }
    }
}

/// The six standard power-law sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Noiseless, `m = 128`, sparsity sweep; recovery probability.
    Fig1,
    /// Noiseless, `s = 25`, measurement sweep `1..100`; recovery probability.
    Fig2,
    /// Noisy dense signals, `m = 128`, sparsity sweep; mean log error.
    Fig3,
    /// As `Fig3`; log standard deviation.
    Fig4,
    /// Noisy dense signals, `s = 25`, measurement sweep; mean log error.
    Fig5,
    /// As `Fig5`; log standard deviation.
    Fig6,
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fig1" => Ok(Protocol::Fig1),
            "fig2" => Ok(Protocol::Fig2),
            "fig3" => Ok(Protocol::Fig3),
            "fig4" => Ok(Protocol::Fig4),
            "fig5" => Ok(Protocol::Fig5),
            "fig6" => Ok(Protocol::Fig6),
            other => Err(Error::InvalidArgument(format!("unknown protocol '{other}'"))),
        }
    }
}

impl Protocol {
    pub fn config(self) -> ExperimentConfig {
        let base = ExperimentConfig::default();
        match self {
            Protocol::Fig1 => ExperimentConfig {
                sweep: SweepKind::Sparsity,
                s: (1..=80).collect(),
                ..base
            },
            Protocol::Fig2 => ExperimentConfig {
                sweep: SweepKind::Measurements,
                m: (1..=100).collect(),
                ..base
            },
            Protocol::Fig3 | Protocol::Fig4 => ExperimentConfig {
                sweep: SweepKind::Sparsity,
                s: (1..=80).collect(),
                sigma: DEFAULT_NOISE_SIGMA,
                ..base
            },
            Protocol::Fig5 | Protocol::Fig6 => ExperimentConfig {
                sweep: SweepKind::Measurements,
                m: (1..=100).collect(),
                sigma: DEFAULT_NOISE_SIGMA,
                ..base
            },
        }
    }

    /// The metric the preset reports.
    pub fn metric(self) -> Metric {
        match self {
            Protocol::Fig1 | Protocol::Fig2 => Metric::RecoveryProbability,
            Protocol::Fig3 | Protocol::Fig5 => Metric::MeanLogError,
            Protocol::Fig4 | Protocol::Fig6 => Metric::LogStdError,
        }
    }
}

/// Noise level of the noisy presets.
pub const DEFAULT_NOISE_SIGMA: f64 = 0.01;

/// Matrix normalization used by the experiments unless configured otherwise.
///
/// With entries of variance `1/m` the unit-step iterations of IHT and IHWT
/// overflow at `m <= 128, N = 256`; rescaling every draw to spectral norm
/// 0.99 keeps them stable. The least-squares solvers are unaffected by the
/// scale apart from the relative size of the noise.
pub const DEFAULT_SCALING: MatrixScaling = MatrixScaling::Spectral(0.99);

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: Vec<usize>,
    pub s: Vec<usize>,
    pub sweep: SweepKind,
    pub trials: usize,
    pub seed: u64,
    pub solvers: Vec<SolverKind>,
    /// Noise standard deviation; zero selects the noiseless protocol.
    pub sigma: f64,
    pub projection: ProjectionMode,
    pub recovery_tol: f64,
    pub scaling: MatrixScaling,
    pub amplitude: RangeInclusive<u32>,
    pub exponent: RangeInclusive<u32>,
    pub max_iters: usize,
    pub halt_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 256,
            m: vec![128],
            s: vec![25],
            sweep: SweepKind::Sparsity,
            trials: 200,
            seed: 0,
            solvers: SolverKind::ALL.to_vec(),
            sigma: 0.0,
            projection: ProjectionMode::Surrogate,
            recovery_tol: 1e-4,
            scaling: DEFAULT_SCALING,
            amplitude: DEFAULT_AMPLITUDE_RANGE,
            exponent: DEFAULT_EXPONENT_RANGE,
            max_iters: 500,
            halt_tol: 1e-10,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

impl ExperimentConfig {
    pub fn is_noisy(&self) -> bool {
        self.sigma > 0.0
    }

    pub fn sweep_values(&self) -> &[usize] {
        match self.sweep {
            SweepKind::Sparsity => &self.s,
            SweepKind::Measurements => &self.m,
        }
    }

    /// `(m, s)` at sweep position `k`.
    fn point(&self, k: usize) -> (usize, usize) {
        match self.sweep {
            SweepKind::Sparsity => (self.m[0], self.s[k]),
            SweepKind::Measurements => (self.m[k], self.s[0]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.n == 0 {
            return Err(invalid("n must be positive"));
        }
        for (name, list) in [("m", &self.m), ("s", &self.s)] {
            if list.is_empty() {
                return Err(invalid(format!("{name} list is empty")));
            }
            if list.windows(2).any(|p| p[1] <= p[0]) {
                return Err(invalid(format!("{name} list must be strictly increasing")));
            }
        }
        let fixed = match self.sweep {
            SweepKind::Sparsity => ("m", self.m.len()),
            SweepKind::Measurements => ("s", self.s.len()),
        };
        if fixed.1 != 1 {
            return Err(invalid(format!(
                "{} must be a single value when sweeping {}",
                fixed.0,
                self.sweep.name()
            )));
        }
        if self.m[0] == 0 {
            return Err(invalid("m must be positive"));
        }
        if self.s[0] == 0 {
            return Err(invalid("s must be positive"));
        }
        let s_max = *self.s.last().unwrap();
        if 2 * s_max >= self.n {
            return Err(invalid(format!(
                "block weights need 2s < n, got s={s_max}, n={}",
                self.n
            )));
        }
        if self.solvers.contains(&SolverKind::Cosamp) && 3 * s_max > self.n {
            return Err(invalid(format!(
                "cosamp needs 3s <= n, got s={s_max}, n={}",
                self.n
            )));
        }
        if self.solvers.is_empty() {
            return Err(invalid("no solvers selected"));
        }
        let mut seen = self.solvers.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.solvers.len() {
            return Err(invalid("duplicate solver"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma must be finite and nonnegative"));
        }
        if !(self.recovery_tol > 0.0) {
            return Err(invalid("recovery_tol must be positive"));
        }
        if self.amplitude.is_empty() || *self.amplitude.start() < 1 {
            return Err(invalid("amplitude range must be nonempty and start at 1 or more"));
        }
        if self.exponent.is_empty() || *self.exponent.start() < 1 {
            return Err(invalid("exponent range must be nonempty and start at 1 or more"));
        }
        if self.projection == ProjectionMode::ExactEnum && self.n > crate::combinatorics::MAX_ENUMERATION_N {
            return Err(invalid("exact_enum projection is limited to small n"));
        }
        self.solver_config().validate()
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            halt_tol: self.halt_tol,
            projection: self.projection,
            detail: TraceDetail::Light,
            ..SolverConfig::default()
        }
    }

    /// Parses flat `key = value` text. Blank lines and lines starting with
    /// `#` are ignored; absent keys keep their defaults.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_str(text)?;
        Ok(cfg)
    }

    /// Like [`ExperimentConfig::parse_str`], but on top of `self`: only the
    /// keys present in `text` change.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                invalid(format!("line {}: expected 'key = value'", idx + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| invalid(format!("line {}: {}", idx + 1, strip_kind(&e))))?;
        }
        Ok(())
    }

    /// Sets one field from its textual form, as in a config file.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| invalid(format!("malformed value '{v}' for {key}")))
        }
        match key {
            "n" => self.n = num(key, value)?,
            "m" => self.m = parse_usize_list(key, value)?,
            "s" => self.s = parse_usize_list(key, value)?,
            "sweep" => self.sweep = value.parse()?,
            "trials" => self.trials = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "solvers" => {
                self.solvers = value
                    .split(',')
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "sigma" => self.sigma = num(key, value)?,
            "projection" => self.projection = value.parse()?,
            "recovery_tol" => self.recovery_tol = num(key, value)?,
            "scaling" => self.scaling = parse_scaling(value)?,
            "amplitude" => self.amplitude = parse_u32_range(key, value)?,
            "exponent" => self.exponent = parse_u32_range(key, value)?,
            "max_iters" => self.max_iters = num(key, value)?,
            "halt_tol" => self.halt_tol = num(key, value)?,
            other => return Err(invalid(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// `(key, value)` pairs in the file format, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n", self.n.to_string()),
            ("m", format_usize_list(&self.m)),
            ("s", format_usize_list(&self.s)),
            ("sweep", self.sweep.name().to_string()),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            (
                "solvers",
                self.solvers
                    .iter()
                    .map(|s| s.name())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("sigma", self.sigma.to_string()),
            ("projection", self.projection.name().to_string()),
            ("recovery_tol", self.recovery_tol.to_string()),
            ("scaling", format_scaling(self.scaling)),
            (
                "amplitude",
                format!("{}..{}", self.amplitude.start(), self.amplitude.end()),
            ),
            (
                "exponent",
                format!("{}..{}", self.exponent.start(), self.exponent.end()),
            ),
            ("max_iters", self.max_iters.to_string()),
            ("halt_tol", self.halt_tol.to_string()),
        ]
    }

    pub fn to_config_string(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

fn strip_kind(e: &Error) -> String {
    match e {
        Error::InvalidArgument(m) => m.clone(),
        other => other.to_string(),
    }
}

/// `a..b` is the inclusive range `a, a+1, ..., b`; items are comma-separated.
fn parse_usize_list(key: &str, value: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in value.split(',') {
        let item = item.trim();
        let bad = || invalid(format!("malformed value '{item}' for {key}"));
        if let Some((a, b)) = item.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if b < a {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(item.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

fn format_usize_list(values: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let mut j = i;
        while j + 1 < values.len() && values[j + 1] == values[j] + 1 {
            j += 1;
        }
        if j - i >= 2 {
            parts.push(format!("{}..{}", values[i], values[j]));
        } else {
            parts.extend(values[i..=j].iter().map(|v| v.to_string()));
        }
        i = j + 1;
    }
    parts.join(",")
}

fn parse_u32_range(key: &str, value: &str) -> Result<RangeInclusive<u32>> {
    let bad = || invalid(format!("malformed range '{value}' for {key}"));
    let (a, b) = match value.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (value.trim(), value.trim()),
    };
    Ok(a.parse().map_err(|_| bad())?..=b.parse().map_err(|_| bad())?)
}

/// `rip` or `spectral:c`.
pub fn parse_scaling(value: &str) -> Result<MatrixScaling> {
    let value = value.trim();
    if value == "rip" {
        return Ok(MatrixScaling::Rip);
    }
    if let Some(c) = value.strip_prefix("spectral:") {
        let c: f64 = c
            .trim()
            .parse()
            .map_err(|_| invalid(format!("malformed spectral scaling '{value}'")))?;
        if !(c > 0.0 && c < 1.0) {
            return Err(invalid("spectral scaling must lie in (0, 1)"));
        }
        return Ok(MatrixScaling::Spectral(c));
    }
    Err(invalid(format!("unknown scaling '{value}'")))
}

pub fn format_scaling(scaling: MatrixScaling) -> String {
    match scaling {
        MatrixScaling::Rip => "rip".into(),
        MatrixScaling::Spectral(c) => format!("spectral:{c}"),
    }
}

/// One solver's outcome on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub solver: SolverKind,
    pub sweep_value: usize,
    pub trial: usize,
    /// `||x_approx - x_s||_2` in noiseless runs; the normalized error in noisy runs.
    pub error: f64,
    pub recovered: bool,
    pub iterations: usize,
    pub diverged: bool,
    pub wall_time: Duration,
}

/// `||x_best - x_approx|| / ||e||`.
pub fn normalized_error(x_best: &Signal, x_approx: &Signal, e: &MeasurementVector) -> Result<f64> {
    let noise = e.norm2();
    if noise == 0.0 {
        return Err(Error::UndefinedMetric(
            "normalized error needs a nonzero noise vector".into(),
        ));
    }
    Ok(x_best.distance(x_approx)? / noise)
}

/// `||x_approx - x_true|| <= tol`, inclusive.
pub fn exact_recovery(x_true: &Signal, x_approx: &Signal, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(invalid("recovery tolerance must be positive"));
    }
    Ok(x_true.distance(x_approx)? <= tol)
}

/// The generator of trial `trial` at sweep position `sweep_index`.
pub fn trial_rng(seed: u64, sweep_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((sweep_index as u64) << 32) | trial as u64);
    rng
}

/// Runs every configured solver on one trial.
pub fn run_trial(cfg: &ExperimentConfig, sweep_index: usize, trial: usize) -> Result<Vec<TrialResult>> {
    let (m, s) = cfg.point(sweep_index);
    let sweep_value = cfg.sweep_values()[sweep_index];
    let mut rng = trial_rng(cfg.seed, sweep_index, trial);
    let params = random_power_law_params(&mut rng, cfg.n, cfg.amplitude.clone(), cfg.exponent.clone())?;
    let dense = power_law_signal(&params);
    let x_best = sparse_truncate(&dense, s)?;
    let a = gaussian_matrix_with_rng(&mut rng, m, cfg.n, cfg.scaling)?;
    let (y, noise) = if cfg.is_noisy() {
        let e = gaussian_noise_with_rng(&mut rng, m, cfg.sigma)?;
        (a.apply(&dense)?.add(&e)?, Some(e))
    } else {
        (a.apply(&x_best)?, None)
    };
    let weights = block_weights(cfg.n, s)?;
    let scfg = cfg.solver_config();

    cfg.solvers
        .iter()
        .map(|&solver| {
            let start = Instant::now();
            let trace = match solver {
                SolverKind::Ihwt => ihwt(&a, &y, &weights, SupportBudget::from(s), &scfg)?,
                SolverKind::Iht => iht(&a, &y, s, &scfg)?,
                SolverKind::Cosamp => cosamp(&a, &y, s, &scfg)?,
                SolverKind::Omp => omp(&a, &y, s.min(m), &scfg)?,
            };
            let wall_time = start.elapsed();
            let x = trace.final_iterate();
            let error = match &noise {
                Some(e) => normalized_error(&x_best, x, e)?,
                None => x_best.distance(x)?,
            };
            Ok(TrialResult {
                solver,
                sweep_value,
                trial,
                error,
                recovered: exact_recovery(&x_best, x, cfg.recovery_tol)?,
                iterations: trace.iterations(),
                diverged: trace.diverged,
                wall_time,
            })
        })
        .collect()
}

/// Runs all trials of all sweep points on the current rayon pool; results
/// are ordered by sweep position, trial and solver.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.sweep_values().len())
        .flat_map(|k| (0..cfg.trials).map(move |t| (k, t)))
        .collect();
    let per_job: Vec<Result<Vec<TrialResult>>> = jobs
        .par_iter()
        .map(|&(k, t)| run_trial(cfg, k, t))
        .collect();
    let mut out = Vec::with_capacity(jobs.len() * cfg.solvers.len());
    for r in per_job {
        out.extend(r?);
    }
    Ok(out)
}

fn require(cfg: &ExperimentConfig, sweep: SweepKind, noisy: bool) -> Result<()> {
    if cfg.sweep != sweep {
        return Err(invalid(format!(
            "this protocol sweeps {}, config sweeps {}",
            sweep.name(),
            cfg.sweep.name()
        )));
    }
    if cfg.is_noisy() != noisy {
        return Err(invalid(if noisy {
            "noisy protocol needs sigma > 0"
        } else {
            "noiseless protocol needs sigma = 0"
        }));
    }
    Ok(())
}

/// Noiseless recovery of truncated power laws, sweeping `s`.
pub fn run_sparsity_sweep(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    require(cfg, SweepKind::Sparsity, false)?;
    run_experiment(cfg)
}

/// Noiseless recovery of truncated power laws, sweeping `m`.
pub fn run_measurement_sweep(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    require(cfg, SweepKind::Measurements, false)?;
    run_experiment(cfg)
}

/// Sparse approximation of dense power laws from noisy data, sweeping `s`.
pub fn run_noisy_sparsity_sweep(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    require(cfg, SweepKind::Sparsity, true)?;
    run_experiment(cfg)
}

/// Sparse approximation of dense power laws from noisy data, sweeping `m`.
pub fn run_noisy_measurement_sweep(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    require(cfg, SweepKind::Measurements, true)?;
    run_experiment(cfg)
}

/// Runs whichever of the four protocols the config describes.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    let results = run_trials(cfg)?;
    Ok(AggregateResult {
        sweep: cfg.sweep,
        noisy: cfg.is_noisy(),
        seed: cfg.seed,
        rows: aggregate(&results)?,
    })
}

/// Statistics of one `(solver, sweep value)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub solver: SolverKind,
    pub sweep_value: usize,
    pub trials: usize,
    pub recovery_probability: f64,
    /// Mean of `log10(error)`.
    pub mean_log_error: f64,
    /// `log10` of the sample standard deviation of the error; `None` for a
    /// single trial, negative infinity when all errors agree.
    pub log_std_error: Option<f64>,
}

/// Groups trial results by `(solver, sweep value)`, ordered by solver then
/// sweep value.
pub fn aggregate(results: &[TrialResult]) -> Result<Vec<AggregateRow>> {
    if results.is_empty() {
        return Err(invalid("no trial results to aggregate"));
    }
    let mut groups: BTreeMap<(SolverKind, usize), Vec<&TrialResult>> = BTreeMap::new();
    for r in results {
        if !(r.error >= 0.0) {
            return Err(Error::Numerical(format!(
                "{} at {}: error {} is not a nonnegative number",
                r.solver, r.sweep_value, r.error
            )));
        }
        groups.entry((r.solver, r.sweep_value)).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((solver, sweep_value), group)| {
            let k = group.len() as f64;
            let recovered = group.iter().filter(|r| r.recovered).count() as f64;
            let mean_log = group.iter().map(|r| r.error.log10()).sum::<f64>() / k;
            let log_std = (group.len() > 1).then(|| {
                let mean = group.iter().map(|r| r.error).sum::<f64>() / k;
                let var = group.iter().map(|r| (r.error - mean).powi(2)).sum::<f64>() / (k - 1.0);
                var.sqrt().log10()
            });
            AggregateRow {
                solver,
                sweep_value,
                trials: group.len(),
                recovery_probability: recovered / k,
                mean_log_error: mean_log,
                log_std_error: log_std,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    RecoveryProbability,
    MeanLogError,
    LogStdError,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::RecoveryProbability => "recovery_probability",
            Metric::MeanLogError => "mean_log_error",
            Metric::LogStdError => "log_std_error",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "recovery_probability" => Ok(Metric::RecoveryProbability),
            "mean_log_error" => Ok(Metric::MeanLogError),
            "log_std_error" => Ok(Metric::LogStdError),
            other => Err(invalid(format!("unknown metric '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub sweep: SweepKind,
    pub noisy: bool,
    pub seed: u64,
    pub rows: Vec<AggregateRow>,
}

impl AggregateResult {
    /// Recovery probability for noiseless runs, error statistics for noisy ones.
    pub fn metrics(&self) -> &'static [Metric] {
        if self.noisy {
            &[Metric::MeanLogError, Metric::LogStdError]
        } else {
            &[Metric::RecoveryProbability]
        }
    }

    pub fn row(&self, solver: SolverKind, sweep_value: usize) -> Option<&AggregateRow> {
        self.rows
            .iter()
            .find(|r| r.solver == solver && r.sweep_value == sweep_value)
    }

    /// One record per `(row, metric)`.
    pub fn records(&self) -> Vec<MetricRecord> {
        let mut out = Vec::new();
        for row in &self.rows {
            for &metric in self.metrics() {
                let value = match metric {
                    Metric::RecoveryProbability => Some(row.recovery_probability),
                    Metric::MeanLogError => Some(row.mean_log_error),
                    Metric::LogStdError => row.log_std_error,
                };
                out.push(MetricRecord {
                    solver: row.solver.name().to_string(),
                    sweep_param: self.sweep.name().to_string(),
                    sweep_value: row.sweep_value,
                    metric: metric.name().to_string(),
                    value,
                    trials: row.trials,
                    seed: self.seed,
                });
            }
        }
        out
    }
}

/// One data line of the results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub solver: String,
    pub sweep_param: String,
    pub sweep_value: usize,
    pub metric: String,
    /// `None` is written as `NA`.
    pub value: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "solver,sweep_param,sweep_value,metric,value,trials,seed";

fn format_value(v: Option<f64>) -> String {
    match v {
        None => "NA".into(),
        Some(v) if v == f64::NEG_INFINITY => "-inf".into(),
        Some(v) if v == f64::INFINITY => "inf".into(),
        Some(v) => v.to_string(),
    }
}

fn parse_value(text: &str) -> Result<Option<f64>> {
    match text {
        "NA" => Ok(None),
        "-inf" => Ok(Some(f64::NEG_INFINITY)),
        "inf" => Ok(Some(f64::INFINITY)),
        other => other
            .parse()
            .map(Some)
            .map_err(|_| invalid(format!("malformed value '{other}'"))),
    }
}

/// Writes the config as `# key = value` lines, the header and one line per record.
pub fn write_csv<W: Write>(
    out: W,
    cfg: &ExperimentConfig,
    result: &AggregateResult,
) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(out);
    for (k, v) in cfg.entries() {
        writeln!(out, "# {k} = {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in result.records() {
        w.write_record([
            r.solver,
            r.sweep_param,
            r.sweep_value.to_string(),
            r.metric,
            format_value(r.value),
            r.trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()
}

/// Reads a results CSV; `#` lines are skipped.
pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<MetricRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| invalid(format!("results csv: {e}")))?
        .clone();
    if headers.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(invalid(format!("results csv: expected header '{CSV_HEADER}'")));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| invalid(format!("results csv: {e}")))?;
        let bad = |what: &str| invalid(format!("results csv record {}: malformed {what}", i + 1));
        out.push(MetricRecord {
            solver: rec[0].to_string(),
            sweep_param: rec[1].to_string(),
            sweep_value: rec[2].parse().map_err(|_| bad("sweep_value"))?,
            metric: rec[3].to_string(),
            value: parse_value(&rec[4])?,
            trials: rec[5].parse().map_err(|_| bad("trials"))?,
            seed: rec[6].parse().map_err(|_| bad("seed"))?,
        });
    }
    Ok(out)
}
