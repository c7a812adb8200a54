//! Command-line front end. Exit codes: 0 success, 1 a verdict failed (the
//! report is still written), 2 usage or input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::divergence::{jsd, smooth, GridDensity};
use crate::error::Result;
use crate::experiments::{
    run_gradient_audit, run_mcs_sweep, run_toy_training, run_translation_density, write_report,
    ExperimentConfig, ExperimentReport, ReportFormat,
};
use crate::transport::io::read_point_cloud;
use crate::transport::{wasserstein, Ground, Method};

const POINT_CLOUD_FORMAT: &str = "\
Point-cloud files are CSV with a header row naming the coordinate columns
(for example `x1,...,xn`) and one atom per
line. An optional last column named `weight` gives unnormalized atom
weights; without it every atom weighs the same.";

const GRID_FORMAT: &str = "\
Grid files start with a header line `# box=lo:hi,...;shape=s,...` (one
`lo:hi` and one cell count per axis), followed by one nonnegative cell mass
per line in row-major order (last axis fastest). Masses must sum to one
within 1e-12.";

const EXPERIMENT_FORMAT: &str = "\
The config file is TOML. Top-level `seed = N` is optional; each experiment
reads its own table ([mcs_sweep], [translation], [gradient_audit],
[toy_training]) and every key falls back to its default. Unknown keys are
rejected with the offending line.

Outputs go to the output directory: `<id>_<table>.csv` per table,
`<id>_verdicts.csv` (name, tolerance, passed, detail) and `<id>_meta.toml`
(config hash, seeds). With --svg, one `<id>_<plot>.svg` per plot as well.
Seed precedence: --seed, then the config's `seed`, then 0.";

#[derive(Debug, Parser)]
#[command(
    name = "alignlab",
    version,
    about = "Transport distances, divergences and support-alignment experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Wasserstein distance between two point-cloud files.
    #[command(after_help = POINT_CLOUD_FORMAT)]
    Ot(OtArgs),
    /// Jensen-Shannon divergence (natural log) between two grid files.
    #[command(after_help = GRID_FORMAT)]
    Jsd(JsdArgs),
    /// Overlap-fraction sweep: JSD ceiling and the alpha-to-overlap map.
    #[command(name = "mcs-sweep", after_help = EXPERIMENT_FORMAT)]
    McsSweep(ExperimentArgs),
    /// Translate positively aligned supports and track overlap and W_p.
    #[command(name = "translate-density", after_help = EXPERIMENT_FORMAT)]
    TranslateDensity(ExperimentArgs),
    /// Compare generator-gradient formulas with finite differences.
    #[command(name = "grad-audit", after_help = EXPERIMENT_FORMAT)]
    GradAudit(ExperimentArgs),
    /// Train mixture generators on a multi-mode target with each loss.
    #[command(name = "toy-train", after_help = EXPERIMENT_FORMAT)]
    ToyTrain(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct OtArgs {
    /// Order p of the distance.
    #[arg(long, default_value_t = 1)]
    pub p: u32,
    /// Ground norm: euclidean or l1.
    #[arg(long, default_value_t = Ground::Euclidean)]
    pub ground: Ground,
    /// Use entropic (Sinkhorn) transport with this regularization instead
    /// of the exact solver.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Sinkhorn iteration cap.
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Sinkhorn marginal tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Source point cloud.
    pub source: PathBuf,
    /// Target point cloud.
    pub target: PathBuf,
}

#[derive(Debug, Args)]
pub struct JsdArgs {
    /// Gaussian smoothing width applied to both grids first.
    #[arg(long)]
    pub sigma: Option<f64>,
    pub p: PathBuf,
    pub q: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML experiment config; defaults are used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV/SVG artifacts.
    #[arg(long, env = "ALIGNLAB_OUT", default_value = "alignlab-out")]
    pub out: PathBuf,
    /// Base seed, overriding the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write SVG plots.
    #[arg(long)]
    pub svg: bool,
}

/// Parses `argv` and runs the selected subcommand.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Runs a parsed invocation; `Ok(false)` means a verdict failed.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Ot(a) => {
            let src = read_point_cloud(&a.source)?;
            let tgt = read_point_cloud(&a.target)?;
            let method = match a.epsilon {
                Some(epsilon) => Method::Sinkhorn {
                    epsilon,
                    max_iter: a.max_iter,
                    tol: a.tol,
                },
                None => Method::Exact,
            };
            let w = wasserstein(&src, &tgt, a.p, a.ground, method)?;
            println!("W{} = {w}", a.p);
            Ok(true)
        }
        Command::Jsd(a) => {
            let (mut p, mut q) = (GridDensity::read(&a.p)?, GridDensity::read(&a.q)?);
            if let Some(sigma) = a.sigma {
                p = smooth(&p, sigma)?;
                q = smooth(&q, sigma)?;
            }
            println!("JSD = {}", jsd(&p, &q)?);
            Ok(true)
        }
        Command::McsSweep(a) => experiment(&a, |c, s| run_mcs_sweep(&c.mcs_sweep, s)),
        Command::TranslateDensity(a) => {
            experiment(&a, |c, s| run_translation_density(&c.translation, s))
        }
        Command::GradAudit(a) => experiment(&a, |c, s| run_gradient_audit(&c.gradient_audit, s)),
        Command::ToyTrain(a) => experiment(&a, |c, s| run_toy_training(&c.toy_training, s)),
    }
}

fn experiment(
    args: &ExperimentArgs,
    body: impl FnOnce(&ExperimentConfig, u64) -> Result<ExperimentReport> + Send,
) -> Result<bool> {
    let cfg = match &args.config {
        Some(path) => ExperimentConfig::read(path)?,
        None => ExperimentConfig::default(),
    };
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let report = match args.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| crate::Error::invalid(format!("thread pool: {e}")))?
            .install(|| body(&cfg, seed))?,
        None => body(&cfg, seed)?,
    };
    let written = emit(&report, &args.out, args.svg)?;
    for v in &report.verdicts {
        println!(
            "{} {} (tol {:e}): {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.tolerance,
            v.detail
        );
    }
    println!("wrote {written} files to {}", args.out.display());
    Ok(report.passed())
}

fn emit(report: &ExperimentReport, out: &Path, svg: bool) -> Result<usize> {
    let mut n = write_report(report, out, ReportFormat::Csv)?.len();
    if svg {
        n += write_report(report, out, ReportFormat::Svg)?.len();
    }
    Ok(n)
}
