//! `donut-rd`: donut regression-discontinuity estimation, bias-aware
//! inference, specification tests, kernel-constant tables, and a seeded
//! Monte Carlo study.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 statistical
//! degeneracy, 4 I/O failure.

mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use donut_rd::{
    bias_aware_ci, ci_length_ratio, delta_test_with, gamma_test_with, kernel_constants,
    nn_variance, se_hat, select_bandwidth_with, tau_hat, worst_case_bias, DesignSpec, DgpSpec,
    Error, KernelId, QuadratureSpec, Sample, TestMethod,
};
use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use output::{EstimateReport, TestConfig, TestReport};

#[derive(Debug, ThisError)]
pub enum CliError {
    /// Configuration, usage, or data-schema problem (exit 2).
    #[error("error: {0}")]
    Config(String),
    /// Statistical degeneracy reported by the estimation core (exit 3).
    #[error("error[{label}]: {0}", label = error_label(.0))]
    Degenerate(Error),
    /// Filesystem failure (exit 4).
    #[error("error: {0}")]
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_degeneracy() {
            CliError::Degenerate(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

/// Stable kebab-case name for each degeneracy, quoted in exit-3 messages.
fn error_label(e: &Error) -> &'static str {
    match e {
        Error::InvalidInput(_) => "invalid-input",
        Error::EmptyRange { .. } => "empty-range",
        Error::DegenerateKernelRange { .. } => "degenerate-kernel-range",
        Error::DomainError { .. } => "domain-error",
        Error::InsufficientSupport { .. } => "insufficient-support",
        Error::InsufficientNeighbors { .. } => "insufficient-neighbors",
        Error::NoFeasibleBandwidth => "no-feasible-bandwidth",
        Error::DegenerateVariance => "degenerate-variance",
        Error::DegenerateTest(_) => "degenerate-test",
        Error::InsufficientInnerSupport { .. } => "insufficient-inner-support",
    }
}

#[derive(Parser)]
#[command(
    name = "donut-rd",
    version,
    about = "Donut regression-discontinuity estimation with bias-aware inference",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the RD effect with a bias-aware confidence interval.
    Estimate(EstimateArgs),
    /// Run a donut specification test (delta or gamma).
    Test(TestArgs),
    /// Tabulate kernel constants over a grid of donut ratios.
    Constants(ConstantsArgs),
    /// Run the seeded Monte Carlo study and write summary tables.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV with columns x,y (an optional weight column is ignored).
    #[arg(long, value_name = "FILE")]
    data: PathBuf,

    /// Cutoff subtracted from x before estimation.
    #[arg(long, default_value_t = 0.0)]
    cutoff: f64,

    /// Bandwidth; when absent, selected by worst-case-MSE search.
    #[arg(long)]
    h: Option<f64>,

    /// Donut radius d; 0 gives the conventional estimator.
    #[arg(long = "donut", value_name = "D", default_value_t = 0.0)]
    d: f64,

    /// Kernel: uniform, triangular, or epanechnikov.
    #[arg(long, default_value = "triangular")]
    kernel: KernelId,

    /// Bound on |mu''| away from the cutoff (analyst-chosen; no default).
    #[arg(long = "M", value_name = "M")]
    m: f64,

    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    /// Nearest neighbors per side in the variance estimator.
    #[arg(long = "nn-j", value_name = "J", default_value_t = 3)]
    nn_j: usize,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Which contrast to test: delta (donut vs conventional) or gamma
    /// (donut vs within-donut).
    #[arg(long)]
    method: TestMethod,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Kernel: uniform, triangular, or epanechnikov.
    #[arg(long, default_value = "triangular")]
    kernel: KernelId,

    /// First donut ratio of the grid.
    #[arg(long = "c-from", default_value_t = 0.0)]
    c_from: f64,

    /// Last donut ratio of the grid (must stay below 1).
    #[arg(long = "c-to", default_value_t = 0.5)]
    c_to: f64,

    /// Number of grid points.
    #[arg(long = "c-steps", default_value_t = 51)]
    c_steps: usize,

    /// Significance level of the CI length-ratio column.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON study configuration: {"l_grid": [...], "dgp": {...}}; defaults
    /// reproduce the built-in design.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Replications per distortion strength.
    #[arg(long, default_value_t = 10000)]
    reps: usize,

    /// Master seed of the replication streams.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Directory for table1.csv, table2.csv, table3.csv, manifest.json.
    #[arg(long = "out-dir", value_name = "DIR")]
    out_dir: PathBuf,
}

/// Study configuration file: the distortion grid and the DGP.
#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimulateConfig {
    l_grid: Vec<f64>,
    dgp: DgpSpec,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            l_grid: vec![0.0, 10.0, 20.0, 30.0, 40.0],
            dgp: DgpSpec::default(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Test(args) => cmd_test(args),
        Command::Constants(args) => cmd_constants(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Validate the design configuration before touching the data file, so pure
/// configuration mistakes (d >= h, negative M) fail fast with exit 2.
fn validate_design(cfg: &DataArgs) -> Result<(), CliError> {
    if let Some(h) = cfg.h {
        DesignSpec::new(h, cfg.d, cfg.kernel, cfg.m)?;
    } else if cfg.d < 0.0 || !cfg.d.is_finite() {
        return Err(CliError::Config(format!(
            "donut radius must be nonnegative and finite, got {}",
            cfg.d
        )));
    }
    Ok(())
}

/// Shared estimation pipeline: ingest, estimate variance, resolve the
/// bandwidth, and build the design.
fn prepare(cfg: &DataArgs) -> Result<(Sample, Vec<f64>, DesignSpec, bool), CliError> {
    validate_design(cfg)?;
    let sample = input::read_sample(&cfg.data, cfg.cutoff)?;
    let sigma2 = nn_variance(&sample, cfg.nn_j)?;
    let (h_used, h_was_selected) = match cfg.h {
        Some(h) => (h, false),
        None => (
            select_bandwidth_with(&sample, cfg.m, cfg.d, cfg.kernel, &sigma2)?,
            true,
        ),
    };
    let spec = DesignSpec::new(h_used, cfg.d, cfg.kernel, cfg.m)?;
    Ok((sample, sigma2, spec, h_was_selected))
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let cfg = args.data;
    let (sample, sigma2, spec, h_was_selected) = prepare(&cfg)?;
    let fit = tau_hat(&sample, &spec)?;
    let b_bar = worst_case_bias(&fit.weights, &sample, cfg.m)?;
    let s_hat = se_hat(&fit.weights, &sigma2)?;
    let ci = bias_aware_ci(fit.tau_hat, b_bar, s_hat, cfg.alpha)?;
    output::print_json(&EstimateReport {
        tau_hat: fit.tau_hat,
        b_bar,
        s_hat,
        ci_lower: ci.lower(),
        ci_upper: ci.upper(),
        cv: ci.cv,
        bias_ratio: ci.bias_ratio,
        eff_n_plus: fit.weights.eff_n_plus,
        eff_n_minus: fit.weights.eff_n_minus,
        h_used: spec.h(),
        h_was_selected,
        d: spec.d(),
        kernel: spec.kernel(),
        m: spec.m(),
        alpha: cfg.alpha,
        cutoff: cfg.cutoff,
        nn_j: cfg.nn_j,
        data: cfg.data.display().to_string(),
    });
    Ok(())
}

fn cmd_test(args: TestArgs) -> Result<(), CliError> {
    let cfg = args.data;
    let (sample, sigma2, spec, h_was_selected) = prepare(&cfg)?;
    let result = match args.method {
        TestMethod::Delta => delta_test_with(&sample, &spec, cfg.alpha, &sigma2)?,
        TestMethod::Gamma => gamma_test_with(&sample, &spec, cfg.alpha, &sigma2)?,
    };
    output::print_json(&TestReport {
        config: TestConfig {
            method: args.method,
            h_used: spec.h(),
            h_was_selected,
            d: spec.d(),
            kernel: spec.kernel(),
            m: spec.m(),
            alpha: cfg.alpha,
            cutoff: cfg.cutoff,
            nn_j: cfg.nn_j,
            data: cfg.data.display().to_string(),
        },
        result,
    });
    Ok(())
}

fn cmd_constants(args: ConstantsArgs) -> Result<(), CliError> {
    let invalid = |msg: String| Err(CliError::Config(msg));
    if !args.c_from.is_finite() || !args.c_to.is_finite() || args.c_from < 0.0 {
        return invalid(format!(
            "donut-ratio grid must be finite and nonnegative, got [{}, {}]",
            args.c_from, args.c_to
        ));
    }
    if args.c_to >= 1.0 {
        return invalid(format!(
            "donut ratios must stay below 1, got c-to = {}",
            args.c_to
        ));
    }
    if args.c_to < args.c_from {
        return invalid(format!(
            "empty donut-ratio grid: c-from = {} > c-to = {}",
            args.c_from, args.c_to
        ));
    }
    if args.c_steps == 0 {
        return invalid("c-steps must be at least 1".into());
    }

    let quad = QuadratureSpec::default();
    let base = kernel_constants(&args.kernel, 0.0, &quad)?;
    let mut rows = Vec::with_capacity(args.c_steps);
    for i in 0..args.c_steps {
        let c = if args.c_steps == 1 {
            args.c_from
        } else {
            args.c_from + (args.c_to - args.c_from) * i as f64 / (args.c_steps - 1) as f64
        };
        let k = kernel_constants(&args.kernel, c, &quad)?;
        let b_ratio = k.bias / base.bias;
        let s_ratio = k.variance / base.variance;
        let length_ratio = ci_length_ratio(args.kernel, c, args.alpha)?;
        rows.push((k, b_ratio, s_ratio, length_ratio));
    }
    eprintln!(
        "constants: kernel={} alpha={} grid=[{}, {}] steps={}",
        args.kernel, args.alpha, args.c_from, args.c_to, args.c_steps
    );
    output::write_constants_csv(std::io::stdout().lock(), &rows)
}

/// Worker cap from RD_THREADS; absent means all available cores.
fn rd_threads() -> Result<Option<usize>, CliError> {
    match std::env::var("RD_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("RD_THREADS: {e}"))),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "RD_THREADS must be a positive integer, got {raw:?}"
            ))),
        },
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let config = match &args.config {
        Some(path) => {
            let body = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<SimulateConfig>(&body)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => SimulateConfig::default(),
    };
    if config.l_grid.is_empty() {
        return Err(CliError::Config("l_grid must not be empty".into()));
    }

    std::fs::create_dir_all(&args.out_dir).map_err(|e| {
        CliError::Io(format!(
            "cannot create output directory {}: {e}",
            args.out_dir.display()
        ))
    })?;

    let run = || donut_rd::run_study(args.seed, args.reps, &config.l_grid, &config.dgp);
    let study = match rd_threads()? {
        None => run()?,
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?
            .install(run)?,
    };

    output::write_study(&args.out_dir, &study)?;
    eprintln!(
        "simulate: seed={} reps={} rows={} -> {}/{{table1,table2,table3}}.csv, manifest.json",
        args.seed,
        args.reps,
        study.rows.len(),
        args.out_dir.display()
    );
    Ok(())
}
