//! `wsparse` command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors.
//! Data goes to stdout or files; everything informational goes to stderr.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wsparse::combinatorics::{count_supports, distinct_partition_count, CountMode};
use wsparse::experiments::{
    read_csv, run_experiment, trial_rng, write_csv, Metric, Protocol, SolverKind,
};
use wsparse::io::{read_matrix_file, read_vector_file, write_matrix, write_trace};
use wsparse::plot::render_svg;
use wsparse::sensing::{gaussian_matrix, rip_constant, MatrixScaling, SensingMatrix};
use wsparse::signal_models::{block_weights, power_law_signal, random_power_law_params};
use wsparse::thresholding::{
    exact_weighted_threshold, hard_threshold, projection_error, surrogate_weighted_threshold_with,
    SurrogateRule,
};
use wsparse::{
    cosamp, ihwt, iht, omp, support_of, MeasurementVector, ProjectionMode, Signal, SolverConfig,
    SupportBudget, WeightVector,
};

#[derive(Parser)]
#[command(name = "wsparse", version, about = "Weighted sparse approximation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project a signal onto the weighted (or plain) sparsity set.
    Project(ProjectArgs),
    /// Run one solver on a matrix and measurements, writing the trace as CSV.
    Solve(SolveArgs),
    /// Exact weighted RIP constant by support enumeration (N <= 25).
    RipEstimate(RipArgs),
    /// Count supports with omega(I) = s (or <= s).
    CountPartitions(CountArgs),
    /// Run a sweep experiment and write the aggregate CSV.
    Experiment(ExperimentArgs),
    /// Render an experiment CSV as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Args)]
struct ProjectArgs {
    /// exact, exact_dp, exact_enum, surrogate, surrogate_stop or hard.
    #[arg(long, default_value = "exact")]
    mode: String,
    /// Inline list, `sqrt`, `blocks:S` or `uniform`.
    #[arg(long, default_value = "uniform")]
    weights: String,
    #[arg(long)]
    s: f64,
    /// Inline comma-separated values or a file path.
    #[arg(long)]
    signal: String,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value = "ihwt")]
    solver: String,
    /// Matrix CSV, one row per line.
    #[arg(long, requires = "measurements", conflicts_with = "random")]
    matrix: Option<PathBuf>,
    /// Measurement vector file.
    #[arg(long)]
    measurements: Option<PathBuf>,
    /// Random instance `M,N`: Gaussian matrix and a power-law signal.
    #[arg(long)]
    random: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "uniform")]
    weights: String,
    #[arg(long)]
    s: f64,
    /// Weighted projection used by ihwt.
    #[arg(long, default_value = "surrogate")]
    mode: String,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    halt_tol: f64,
    /// Trace CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RipArgs {
    #[arg(long, conflicts_with = "random")]
    matrix: Option<PathBuf>,
    /// Random Gaussian matrix `M,N` with variance 1/M entries.
    #[arg(long)]
    random: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Omit for the unweighted constant.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    s: f64,
    /// Also write the matrix as CSV.
    #[arg(long)]
    write_matrix: Option<PathBuf>,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long, default_value = "sqrt")]
    weights: String,
    #[arg(long)]
    s: f64,
    /// Signal length; defaults to the list length, or `ceil(s)` for `sqrt`.
    #[arg(long)]
    n: Option<usize>,
    /// Count `omega(I) <= s` instead of `== s`.
    #[arg(long)]
    at_most: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// fig1 .. fig6 preset.
    #[arg(long)]
    protocol: Option<String>,
    /// `key = value` file applied on top of the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Worker thread cap; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Override any config key, e.g. `--set m=40..60`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Also render the preset metric (or the first one) as SVG.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    input: PathBuf,
    /// Metric column to draw; the first one in the file when absent.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

type Outcome<T> = Result<T, Failure>;

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(msg.to_string())
}

fn runtime(msg: impl std::fmt::Display) -> Failure {
    Failure::Runtime(msg.to_string())
}

fn parse_list(text: &str) -> Option<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().ok())
        .collect()
}

fn parse_weights(spec: &str, n: usize) -> Outcome<WeightVector> {
    let spec = spec.trim();
    if spec == "sqrt" {
        return Ok(WeightVector::sqrt_index(n));
    }
    if spec == "uniform" {
        return Ok(WeightVector::uniform(n));
    }
    if let Some(s) = spec.strip_prefix("blocks:") {
        let s: usize = s.parse().map_err(|_| usage(format!("bad block size in '{spec}'")))?;
        return block_weights(n, s).map_err(usage);
    }
    let values = parse_list(spec).ok_or_else(|| usage(format!("cannot parse weights '{spec}'")))?;
    if values.len() != n {
        return Err(usage(format!("{} weights for length {n}", values.len())));
    }
    WeightVector::new(values).map_err(usage)
}

fn parse_dims(spec: &str) -> Outcome<(usize, usize)> {
    let parts: Vec<&str> = spec.split([',', 'x']).collect();
    match parts.as_slice() {
        [m, n] => match (m.trim().parse(), n.trim().parse()) {
            (Ok(m), Ok(n)) => Ok((m, n)),
            _ => Err(usage(format!("expected M,N, got '{spec}'"))),
        },
        _ => Err(usage(format!("expected M,N, got '{spec}'"))),
    }
}

fn budget(s: f64) -> Outcome<SupportBudget> {
    SupportBudget::new(s).map_err(usage)
}

fn fmt_list<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn create(path: &Path) -> Outcome<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn project(args: ProjectArgs) -> Outcome<()> {
    let values = match parse_list(&args.signal) {
        Some(v) => v,
        None => read_vector_file(Path::new(&args.signal)).map_err(runtime)?,
    };
    let x = Signal::new(values).map_err(usage)?;
    let n = x.len();
    let z = match args.mode.as_str() {
        "hard" => {
            if args.s < 0.0 || args.s.fract() != 0.0 {
                return Err(usage("hard thresholding needs an integer s"));
            }
            hard_threshold(&x, args.s as usize).map_err(runtime)?
        }
        mode => {
            let w = parse_weights(&args.weights, n)?;
            let s = budget(args.s)?;
            match mode {
                // DP when the squared weights are integers, enumeration otherwise
                "exact" => {
                    let m = if w.integer_squares().is_some() {
                        ProjectionMode::ExactDp
                    } else {
                        ProjectionMode::ExactEnum
                    };
                    exact_weighted_threshold(&x, &w, s, m).map_err(runtime)?
                }
                "surrogate" => {
                    surrogate_weighted_threshold_with(&x, &w, s, SurrogateRule::SkipNonFitting).map_err(runtime)?
                }
                "surrogate_stop" | "surrogate-stop" => {
                    surrogate_weighted_threshold_with(&x, &w, s, SurrogateRule::StopAtFirstMiss)
                        .map_err(runtime)?
                }
                other => {
                    let m: ProjectionMode = other.parse().map_err(usage)?;
                    exact_weighted_threshold(&x, &w, s, m).map_err(runtime)?
                }
            }
        }
    };
    let support = support_of(&z);
    let err = projection_error(&x, &z).map_err(runtime)?;
    println!("support: {}", fmt_list(support.indices().iter().map(|j| j + 1)));
    println!("0-indexed support: {}", fmt_list(support.indices()));
    println!("error: {err}");
    println!("projection: {}", fmt_list(z.as_slice()));
    Ok(())
}

fn solve(args: SolveArgs) -> Outcome<()> {
    let kind: SolverKind = args.solver.parse().map_err(usage)?;
    let (a, y) = match (&args.matrix, &args.random) {
        (Some(path), None) => {
            let a = read_matrix_file(path).map_err(runtime)?;
            let y = read_vector_file(args.measurements.as_deref().unwrap()).map_err(runtime)?;
            (a, MeasurementVector::new(y).map_err(runtime)?)
        }
        (None, Some(dims)) => {
            let seed = args.seed.ok_or_else(|| usage("--random needs --seed"))?;
            let (m, n) = parse_dims(dims)?;
            let a = gaussian_matrix(m, n, seed, MatrixScaling::Spectral(0.99)).map_err(usage)?;
            let mut rng = trial_rng(seed, 0, 0);
            let p = random_power_law_params(&mut rng, n, 1..=10, 1..=3).map_err(runtime)?;
            let x = power_law_signal(&p);
            eprintln!("random instance: amplitude {}, exponent {}", p.amplitude, p.exponent);
            let y = a.apply(&x).map_err(runtime)?;
            (a, y)
        }
        _ => return Err(usage("give either --matrix with --measurements, or --random")),
    };
    let mode: ProjectionMode = args.mode.parse().map_err(usage)?;
    let cfg = SolverConfig {
        max_iters: args.max_iters,
        halt_tol: args.halt_tol,
        ..SolverConfig::default()
    }
    .with_projection(mode);
    let whole = |name: &str| -> Outcome<usize> {
        if args.s < 0.0 || args.s.fract() != 0.0 {
            Err(usage(format!("{name} needs an integer s")))
        } else {
            Ok(args.s as usize)
        }
    };
    let trace = match kind {
        SolverKind::Ihwt => {
            let w = parse_weights(&args.weights, a.cols())?;
            ihwt(&a, &y, &w, budget(args.s)?, &cfg)
        }
        SolverKind::Iht => iht(&a, &y, whole("iht")?, &cfg),
        SolverKind::Cosamp => cosamp(&a, &y, whole("cosamp")?, &cfg),
        SolverKind::Omp => omp(&a, &y, whole("omp")?, &cfg),
    }
    .map_err(runtime)?;
    eprintln!(
        "{kind}: {} iterations, final objective {:e}{}{}",
        trace.iterations(),
        trace.objectives.last().copied().unwrap_or(0.0),
        if trace.diverged { ", diverged" } else { "" },
        if trace.regularized { ", regularized" } else { "" },
    );
    match &args.out {
        Some(path) => write_trace(create(path)?, &trace),
        None => write_trace(io::stdout().lock(), &trace),
    }
    .map_err(runtime)
}

fn rip_estimate(args: RipArgs) -> Outcome<()> {
    let a: SensingMatrix = match (&args.matrix, &args.random) {
        (Some(path), None) => read_matrix_file(path).map_err(runtime)?,
        (None, Some(dims)) => {
            let seed = args.seed.ok_or_else(|| usage("--random needs --seed"))?;
            let (m, n) = parse_dims(dims)?;
            gaussian_matrix(m, n, seed, MatrixScaling::Rip).map_err(usage)?
        }
        _ => return Err(usage("give either --matrix or --random")),
    };
    if let Some(path) = &args.write_matrix {
        write_matrix(create(path)?, &a).map_err(runtime)?;
    }
    let w = args.weights.as_deref().map(|spec| parse_weights(spec, a.cols())).transpose()?;
    let est = rip_constant(&a, w.as_ref(), budget(args.s)?).map_err(runtime)?;
    println!("delta: {}", est.delta);
    eprintln!("supports checked: {}", est.supports_checked);
    Ok(())
}

fn count_partitions(args: CountArgs) -> Outcome<()> {
    let n = match args.n {
        Some(n) => n,
        None if args.weights == "sqrt" => args.s.max(0.0).ceil() as usize,
        None => match parse_list(&args.weights) {
            Some(v) => v.len(),
            None => return Err(usage("--n is required for these weights")),
        },
    };
    let w = parse_weights(&args.weights, n)?;
    let mode = if args.at_most { CountMode::AtMost } else { CountMode::Exact };
    let count = count_supports(&w, budget(args.s)?, mode).map_err(runtime)?;
    println!("{count}");
    if args.weights == "sqrt" && !args.at_most && args.s.fract() == 0.0 && n >= args.s as usize {
        let q = distinct_partition_count(args.s as usize);
        eprintln!("distinct partitions q({}) by recurrence: {q}", args.s);
        if args.s == 100.0 {
            eprintln!(
                "note: the commonly quoted figure for s = 100 is 444,794; the exact count is {count}"
            );
        }
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Outcome<()> {
    let protocol: Option<Protocol> = args.protocol.as_deref().map(str::parse).transpose().map_err(usage)?;
    let mut cfg = protocol.map(Protocol::config).unwrap_or_default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        cfg.apply_str(&text).map_err(usage)?;
    }
    for o in &args.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| usage(format!("expected KEY=VALUE, got '{o}'")))?;
        cfg.set(k.trim(), v.trim()).map_err(usage)?;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    cfg.seed = args.seed;
    cfg.validate().map_err(usage)?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(usage("--threads must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(runtime)?;
    eprintln!(
        "running {} trials x {} sweep points x {} solvers",
        cfg.trials,
        cfg.sweep_values().len(),
        cfg.solvers.len()
    );
    let agg = pool.install(|| run_experiment(&cfg)).map_err(runtime)?;
    let mut out = create(&args.out)?;
    write_csv(&mut out, &cfg, &agg).map_err(runtime)?;
    out.flush().map_err(runtime)?;
    eprintln!("wrote {}", args.out.display());
    if let Some(path) = &args.plot {
        let metric: Metric = match protocol {
            Some(p) => p.metric(),
            None => agg.metrics()[0],
        };
        let svg = render_svg(&agg.records(), metric.name()).map_err(runtime)?;
        std::fs::write(path, svg).map_err(runtime)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn plot(args: PlotArgs) -> Outcome<()> {
    let file = File::open(&args.input).map_err(|e| runtime(format!("{}: {e}", args.input.display())))?;
    let records = read_csv(BufReader::new(file)).map_err(runtime)?;
    let metric = match args.metric {
        Some(m) => m,
        None => records.first().map(|r| r.metric.clone()).ok_or_else(|| runtime("no records"))?,
    };
    let svg = render_svg(&records, &metric).map_err(runtime)?;
    std::fs::write(&args.out, svg).map_err(runtime)?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Project(a) => project(a),
        Command::Solve(a) => solve(a),
        Command::RipEstimate(a) => rip_estimate(a),
        Command::CountPartitions(a) => count_partitions(a),
        Command::Experiment(a) => experiment(a),
        Command::Plot(a) => plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
