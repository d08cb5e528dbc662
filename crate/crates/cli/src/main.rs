mod config;
mod error;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracspline::format::g17;
use fracspline::sampling::{
    reconstruct_from_averages, reconstruct_from_points, synthesize, uniform_grid, verify_report, ReconstructionMode,
    SampleKind, SampleSet, Sampler, SplineSignal, VerifyOptions,
};
use fracspline::specfun::{hurwitz_zeta, ZetaArgs};
use fracspline::spectra::{max_support, min_modulus_check};
use fracspline::splines::{
    avg_prefilter_coeffs, beta_integer_samples, check_support, prefilter_coeffs, weighted_samples, FundamentalSpline,
    SupportPolicy,
};
use fracspline::{AveragingKernel, SplineOrder, SymbolSource};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use config::{CoeffKind, Command, FileConfig, Mode, RunConfig};
use error::{CliError, EXIT_BUDGET, EXIT_CERTIFICATE, EXIT_CHECK};
use io::{Cell, Table};

const DEFAULT_SYMBOL_GRID: usize = 8192;

#[derive(Parser)]
#[command(name = "fracspline", version, about = "Fractional cardinal splines: sampling and reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// TOML file with defaults; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,

    /// Output file (stdout when omitted).
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(flatten)]
    numeric: NumericFlags,
}

#[derive(Args, Default)]
struct NumericFlags {
    #[arg(long, global = true)]
    zeta_tol: Option<f64>,
    #[arg(long, global = true)]
    symbol_tol: Option<f64>,
    #[arg(long, global = true)]
    trunc_tol: Option<f64>,
    #[arg(long, global = true)]
    zero_threshold: Option<f64>,
    #[arg(long, global = true)]
    max_grid: Option<usize>,
    #[arg(long, global = true)]
    max_half_width: Option<usize>,
    #[arg(long, global = true)]
    cache_tol: Option<f64>,
}

#[derive(Args, Default)]
struct SplineArgs {
    /// Fractional order sigma.
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
    /// Averaging kernel: rect:l, tri:l, cos:l or file:path.
    #[arg(long)]
    kernel: Option<String>,
}

#[derive(Args, Default)]
struct EvalPoints {
    /// CSV with a `t` column.
    #[arg(long, value_name = "FILE")]
    points: Option<PathBuf>,
    /// Uniform grid `lo:hi:per_unit`.
    #[arg(long, value_name = "LO:HI:N", allow_hyphen_values = true)]
    t_grid: Option<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Hurwitz zeta value.
    Zeta {
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Symbol samples on a uniform grid (columns omega, re, im, modulus).
    Symbol {
        #[command(flatten)]
        spline: SplineArgs,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Largest admissible kernel half-width for an order.
    SupportBound {
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Prefilter or sample coefficients (columns k, re, im).
    Coeffs {
        #[command(flatten)]
        spline: SplineArgs,
        /// Coefficient truncation tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum)]
        kind: Option<CoeffKind>,
        #[arg(long)]
        override_support: bool,
    },
    /// Fundamental spline values (columns t, L).
    Fundamental {
        #[command(flatten)]
        spline: SplineArgs,
        #[command(flatten)]
        at: EvalPoints,
        #[arg(long)]
        override_support: bool,
    },
    /// Evaluate a spline signal from its coefficients (columns t, f).
    Synth {
        #[arg(long)]
        sigma: Option<f64>,
        /// CSV with columns n, a.
        #[arg(long, value_name = "FILE")]
        signal: PathBuf,
        #[command(flatten)]
        at: EvalPoints,
    },
    /// Point or local-average samples of a spline signal (columns k, s).
    Sample {
        #[command(flatten)]
        spline: SplineArgs,
        #[arg(long, value_name = "FILE")]
        signal: PathBuf,
        /// Integer sample range `lo:hi`.
        #[arg(long, value_name = "LO:HI", allow_hyphen_values = true)]
        range: Option<String>,
        /// Half-width of additive uniform noise.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Reconstruct a signal from samples (columns t, f).
    Reconstruct {
        #[command(flatten)]
        spline: SplineArgs,
        /// CSV with columns k, s.
        #[arg(long, value_name = "FILE")]
        samples: PathBuf,
        #[command(flatten)]
        at: EvalPoints,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        override_support: bool,
    },
    /// Run the certificate and reconstruction checks; JSON report.
    Verify {
        #[command(flatten)]
        spline: SplineArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        signals: Option<usize>,
        #[arg(long)]
        override_support: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_cli(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("fracspline: {err}");
            ExitCode::from(err.code as u8)
        }
    }
}

fn run_cli(cli: Cli) -> Result<i32, CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    init_threads(file.threads)?;
    let cfg = resolve(cli, file)?;
    if cfg.1 {
        print!("{}", cfg.0.canonical());
        return Ok(0);
    }
    run(&cfg.0)
}

/// Size of the global thread pool: `FRACSPLINE_THREADS`, else the config file.
fn init_threads(file_threads: Option<usize>) -> Result<(), CliError> {
    let threads = match std::env::var("FRACSPLINE_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::config(format!("FRACSPLINE_THREADS must be a positive integer, got {v:?}")))?,
        ),
        Err(_) => file_threads,
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Merges flags over the config file over defaults.
fn resolve(cli: Cli, file: FileConfig) -> Result<(RunConfig, bool), CliError> {
    let (command, spline) = match &cli.command {
        Sub::Zeta { .. } => (Command::Zeta, SplineArgs::default()),
        Sub::Symbol { spline, .. } => (Command::Symbol, clone_spline(spline)),
        Sub::SupportBound { sigma } => (Command::SupportBound, SplineArgs { sigma: *sigma, kernel: None }),
        Sub::Coeffs { spline, .. } => (Command::Coeffs, clone_spline(spline)),
        Sub::Fundamental { spline, .. } => (Command::Fundamental, clone_spline(spline)),
        Sub::Synth { sigma, .. } => (Command::Synth, SplineArgs { sigma: *sigma, kernel: None }),
        Sub::Sample { spline, .. } => (Command::Sample, clone_spline(spline)),
        Sub::Reconstruct { spline, .. } => (Command::Reconstruct, clone_spline(spline)),
        Sub::Verify { spline, .. } => (Command::Verify, clone_spline(spline)),
    };
    let mut cfg = RunConfig::new(command);
    if let Some(n) = file.numeric {
        cfg.numeric = n;
    }
    cfg.sigma = spline.sigma.or(file.sigma);
    if !matches!(command, Command::Zeta | Command::SupportBound | Command::Synth) {
        cfg.kernel = spline.kernel.or(file.kernel);
    }
    cfg.seed = file.seed.unwrap_or(cfg.seed);
    cfg.signals = file.signals.unwrap_or(cfg.signals);
    cfg.noise = file.noise.unwrap_or(cfg.noise);
    cfg.mode = file.mode.unwrap_or(cfg.mode);
    cfg.override_support = file.override_support.unwrap_or(false);
    cfg.out = cli.out;

    let n = &cli.numeric;
    let num = &mut cfg.numeric;
    set(&mut num.zeta_tol, n.zeta_tol);
    set(&mut num.symbol_tol, n.symbol_tol);
    set(&mut num.trunc_tol, n.trunc_tol);
    set(&mut num.zero_threshold, n.zero_threshold);
    set(&mut num.max_grid, n.max_grid);
    set(&mut num.max_half_width, n.max_half_width);
    set(&mut num.cache_tol, n.cache_tol);

    match cli.command {
        Sub::Zeta { s, a, tol } => {
            cfg.s = Some(s);
            cfg.a = Some(a);
            cfg.tol = tol;
        }
        Sub::Symbol { grid, .. } => cfg.grid = Some(grid.unwrap_or(DEFAULT_SYMBOL_GRID)),
        Sub::SupportBound { .. } => {}
        Sub::Coeffs { tol, kind, override_support, .. } => {
            cfg.tol = tol;
            cfg.coeff_kind = kind.unwrap_or_default();
            cfg.override_support |= override_support;
        }
        Sub::Fundamental { at, override_support, .. } => {
            set_points(&mut cfg, at);
            cfg.override_support |= override_support;
        }
        Sub::Synth { signal, at, .. } => {
            cfg.signal = Some(signal);
            set_points(&mut cfg, at);
        }
        Sub::Sample { signal, range, noise, seed, .. } => {
            cfg.signal = Some(signal);
            cfg.range = range;
            set(&mut cfg.noise, noise);
            set(&mut cfg.seed, seed);
        }
        Sub::Reconstruct { samples, at, mode, override_support, .. } => {
            cfg.samples = Some(samples);
            set_points(&mut cfg, at);
            set(&mut cfg.mode, mode);
            cfg.override_support |= override_support;
        }
        Sub::Verify { seed, signals, override_support, .. } => {
            set(&mut cfg.seed, seed);
            set(&mut cfg.signals, signals);
            cfg.override_support |= override_support;
        }
    }
    Ok((cfg, cli.print_config))
}

fn clone_spline(s: &SplineArgs) -> SplineArgs {
    SplineArgs {
        sigma: s.sigma,
        kernel: s.kernel.clone(),
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_points(cfg: &mut RunConfig, at: EvalPoints) {
    cfg.points = at.points;
    cfg.t_grid = at.t_grid;
}

/// Executes the pipeline named by `cfg.command` and returns the exit status.
fn run(cfg: &RunConfig) -> Result<i32, CliError> {
    let num = &cfg.numeric;
    let out = cfg.out.as_deref();
    match cfg.command {
        Command::Zeta => {
            let (s, a) = (cfg.s.unwrap_or(f64::NAN), cfg.a.unwrap_or(f64::NAN));
            let value = hurwitz_zeta(ZetaArgs::new(s, a)?, cfg.tol.unwrap_or(num.zeta_tol))?;
            io::emit(out, format!("{}\n", g17(value)).as_bytes())?;
            Ok(0)
        }
        Command::SupportBound => {
            let l = max_support(order(cfg)?)?;
            io::emit(out, format!("{}\n", g17(l)).as_bytes())?;
            Ok(0)
        }
        Command::Symbol => {
            let source = match kernel(cfg)? {
                Some(k) => SymbolSource::Averaged(order(cfg)?, k),
                None => SymbolSource::Point(order(cfg)?),
            };
            let n = cfg.grid.unwrap_or(DEFAULT_SYMBOL_GRID);
            if n < 2 {
                return Err(CliError::config("--grid must be at least 2"));
            }
            let symbol = source.sample(n, num)?;
            let mut table = Table::new(&["omega", "re", "im", "modulus"]);
            for (j, v) in symbol.values().iter().enumerate() {
                table.row(&[
                    Cell::Float(symbol.omega(j)),
                    Cell::Float(v.re),
                    Cell::Float(v.im),
                    Cell::Float(v.norm()),
                ]);
            }
            io::emit(out, &table.into_bytes())?;
            let cert = min_modulus_check(&symbol, num.zero_threshold);
            if cert.min_modulus <= cert.threshold {
                return Err(fracspline::Error::ZeroFree {
                    min_modulus: cert.min_modulus,
                    threshold: cert.threshold,
                }
                .into());
            }
            Ok(0)
        }
        Command::Coeffs => {
            let o = order(cfg)?;
            let mut n = num.clone();
            set(&mut n.trunc_tol, cfg.tol);
            let seq = match (kernel(cfg)?, cfg.coeff_kind) {
                (None, CoeffKind::Prefilter) => prefilter_coeffs(o, &n)?,
                (None, CoeffKind::Samples) => beta_integer_samples(o, None, &n)?,
                (Some(k), CoeffKind::Prefilter) => avg_prefilter_coeffs(o, &k, policy(cfg), &n)?,
                (Some(k), CoeffKind::Samples) => weighted_samples(o, &k, None, &n)?,
            };
            let mut table = Table::new(&["k", "re", "im"]);
            for (k, v) in seq.iter() {
                table.row(&[Cell::Int(k), Cell::Float(v.re), Cell::Float(v.im)]);
            }
            io::emit(out, &table.into_bytes())?;
            Ok(0)
        }
        Command::Fundamental => {
            let spline = spline(cfg)?;
            let t = eval_points(cfg)?;
            let values = spline.eval_many(&t)?;
            write_series(out, "L", &t, &values)
        }
        Command::Synth => {
            let signal = read_signal(cfg)?;
            let t = eval_points(cfg)?;
            let values = synthesize(&signal, &t, num)?;
            write_series(out, "f", &t, &values)
        }
        Command::Sample => {
            let o = order(cfg)?;
            let signal = read_signal(cfg)?;
            let sampler = match kernel(cfg)? {
                Some(k) => Sampler::average(o, k, num)?,
                None => Sampler::point(o, num)?,
            };
            let range = cfg.range.as_deref().map(parse_range).transpose()?;
            let mut samples = sampler.sample(&signal, range)?;
            if cfg.noise != 0.0 {
                if !(cfg.noise.is_finite() && cfg.noise > 0.0) {
                    return Err(CliError::config("--noise must be a positive half-width"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let eps = cfg.noise;
                samples = samples.perturbed(|_| rng.random_range(-eps..=eps));
            }
            let mut table = Table::new(&["k", "s"]);
            for (k, s) in samples.iter() {
                table.row(&[Cell::Int(k), Cell::Float(s)]);
            }
            io::emit(out, &table.into_bytes())?;
            Ok(0)
        }
        Command::Reconstruct => {
            let spline = spline(cfg)?;
            let path = cfg.samples.as_deref().ok_or_else(|| CliError::config("--samples is required"))?;
            let (base, values) = io::read_indexed(path, "k", "s")?;
            let kind = match spline.kernel() {
                Some(k) => SampleKind::Average(k.clone()),
                None => SampleKind::Point,
            };
            let samples = SampleSet::new(kind, spline.order(), base, values)?;
            let t = eval_points(cfg)?;
            let mode = match cfg.mode {
                Mode::Prefilter => ReconstructionMode::Prefilter,
                Mode::Direct => ReconstructionMode::Direct,
            };
            let values = match spline.kernel() {
                Some(_) => reconstruct_from_averages(&samples, &spline, &t, mode)?,
                None => reconstruct_from_points(&samples, &spline, &t, mode)?,
            };
            write_series(out, "f", &t, &values)
        }
        Command::Verify => {
            let o = order(cfg)?;
            let k = kernel(cfg)?;
            if let Some(k) = &k {
                check_support(o, k, policy(cfg))?;
            }
            let opts = VerifyOptions {
                seed: cfg.seed,
                signals: cfg.signals,
                policy: policy(cfg),
                ..VerifyOptions::default()
            };
            let report = verify_report(o, k.as_ref(), &opts, num);
            io::emit(out, report.to_json().as_bytes())?;
            Ok(report_status(&report))
        }
    }
}

/// Certificate failures outrank budget failures, which outrank other checks.
fn report_status(report: &fracspline::sampling::Report) -> i32 {
    if report.all_pass {
        return 0;
    }
    let failed: Vec<_> = report.entries.iter().filter(|e| !e.pass).collect();
    for e in &failed {
        eprintln!("fracspline: check failed[{}]: {} measured {} bound {}", e.check, e.case, g17(e.measured), g17(e.bound));
    }
    if report.certificate_failed() {
        return EXIT_CERTIFICATE;
    }
    let budget = ["budget:", "non_convergence:", "out_of_cache:"];
    if failed
        .iter()
        .any(|e| e.note.as_deref().is_some_and(|n| budget.iter().any(|b| n.starts_with(b))))
    {
        return EXIT_BUDGET;
    }
    EXIT_CHECK
}

fn order(cfg: &RunConfig) -> Result<SplineOrder, CliError> {
    Ok(SplineOrder::new(cfg.sigma()?)?)
}

fn kernel(cfg: &RunConfig) -> Result<Option<AveragingKernel>, CliError> {
    cfg.kernel
        .as_deref()
        .map(|s| AveragingKernel::parse(s).map_err(CliError::from))
        .transpose()
}

fn policy(cfg: &RunConfig) -> SupportPolicy {
    if cfg.override_support {
        SupportPolicy::Override
    } else {
        SupportPolicy::Enforce
    }
}

fn spline(cfg: &RunConfig) -> Result<FundamentalSpline, CliError> {
    let o = order(cfg)?;
    Ok(match kernel(cfg)? {
        Some(k) => FundamentalSpline::averaged(o, k, policy(cfg), &cfg.numeric)?,
        None => FundamentalSpline::point(o, &cfg.numeric)?,
    })
}

fn read_signal(cfg: &RunConfig) -> Result<SplineSignal, CliError> {
    let path = cfg.signal.as_deref().ok_or_else(|| CliError::config("--signal is required"))?;
    let (offset, coeffs) = io::read_indexed(path, "n", "a")?;
    Ok(SplineSignal::new(order(cfg)?, offset, coeffs)?)
}

fn eval_points(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    match (&cfg.points, &cfg.t_grid) {
        (Some(p), None) => Ok(io::read_columns(p, &["t"])?.remove(0)),
        (None, Some(g)) => parse_t_grid(g),
        (Some(_), Some(_)) => Err(CliError::config("--points and --t-grid are mutually exclusive")),
        (None, None) => Err(CliError::config("one of --points or --t-grid is required")),
    }
}

fn parse_range(text: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::config(format!("range must be lo:hi with integers lo <= hi, got {text:?}"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let (lo, hi): (i64, i64) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_t_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::config(format!("t-grid must be lo:hi:per_unit, got {text:?}"));
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let [lo, hi, n] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: u32 = n.parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi || n == 0 || (hi - lo) * n as f64 > 1e7 {
        return Err(bad());
    }
    Ok(uniform_grid(lo, hi, n))
}

fn write_series(out: Option<&Path>, name: &str, t: &[f64], values: &[f64]) -> Result<i32, CliError> {
    let mut table = Table::new(&["t", name]);
    for (&t, &v) in t.iter().zip(values) {
        table.row(&[Cell::Float(t), Cell::Float(v)]);
    }
    io::emit(out, &table.into_bytes())?;
    Ok(0)
}
