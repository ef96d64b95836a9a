//! Command-line runner for the prethermal thermometry experiments.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod plot;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::{Config, Experiment, Overrides, Provenance};
use error::CliError;
use experiments::Outcome;
use output::Artifact;

pub const MANIFEST_NAME: &str = "manifest.toml";

#[derive(Debug, Parser)]
#[command(name = "prethermal", version, about = "Prethermal quantum thermometry experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML configuration file; a manifest from an earlier run also works.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(
        long,
        global = true,
        value_name = "DIR",
        env = "PRETHERMAL_OUT",
        default_value = "out"
    )]
    pub out: PathBuf,

    /// Seed for the random sampling study.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub plots: bool,

    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time evolution of the V model against its closed-form solution.
    Dynamics(Params),
    /// Prethermal and equilibrium Fisher information over a β grid.
    FisherSweep(Params),
    /// QFI of N-level probes in time and time-weighted QFI against β.
    Nlevel(Params),
    /// Random sampling of initial states bounding ξ.
    XiBound(Params),
    /// Liouvillian eigenvalues and relaxation timescales.
    Spectrum(Params),
}

/// Parameter overrides; each replaces the matching config entry.
#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    /// Probe gap between ground and excited manifold.
    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<f64>,
    /// Excited splitting (V model) or level spacing (N-level probe).
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// System-bath coupling strength.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Inverse temperature of the sample bath.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Inverse temperature the probe was prepared at (thermal initial state).
    #[arg(long, allow_negative_numbers = true)]
    pub beta_ambient: Option<f64>,
    /// Probe kind for `spectrum`: v, qubit or nlevel.
    #[arg(long)]
    pub kind: Option<String>,
    /// Excited-level counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    /// Initial conditions (ground, mixed, thermal), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub initial: Option<Vec<String>>,
    /// Master-equation variant, or `reduced` for `dynamics`.
    #[arg(long)]
    pub variant: Option<String>,
    /// Number of time points on the log grid.
    #[arg(long)]
    pub points: Option<usize>,
    /// First time on the grid.
    #[arg(long, allow_negative_numbers = true)]
    pub t_min: Option<f64>,
    /// Last time on the grid.
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Lower end of the β sweep.
    #[arg(long, allow_negative_numbers = true)]
    pub beta_min: Option<f64>,
    /// Upper end of the β sweep.
    #[arg(long, allow_negative_numbers = true)]
    pub beta_max: Option<f64>,
    /// Number of β values in the sweep.
    #[arg(long)]
    pub beta_points: Option<usize>,
    /// Number of random initial states to draw.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Coherence sampling for `xi-bound`: uniform or grid.
    #[arg(long)]
    pub mode: Option<String>,
}

impl Command {
    pub fn experiment(&self) -> (Experiment, &Params) {
        match self {
            Command::Dynamics(p) => (Experiment::Dynamics, p),
            Command::FisherSweep(p) => (Experiment::FisherSweep, p),
            Command::Nlevel(p) => (Experiment::Nlevel, p),
            Command::XiBound(p) => (Experiment::XiBound, p),
            Command::Spectrum(p) => (Experiment::Spectrum, p),
        }
    }
}

/// Result of a completed run.
#[derive(Debug)]
pub struct RunReport {
    pub experiment: Experiment,
    pub out_dir: PathBuf,
    pub config: Config,
    pub outcome: Outcome,
}

/// Resolved configuration: file (or defaults) with flags applied.
pub fn resolve_config(cli: &Cli) -> Result<(Experiment, Config), CliError> {
    let (exp, p) = cli.command.experiment();
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path).map_err(CliError::Config)?,
        None => Config::default(),
    };
    let o = Overrides {
        seed: cli.seed,
        plots: cli.plots,
        nu: p.nu,
        delta: p.delta,
        gamma: p.gamma,
        beta: p.beta,
        beta_ambient: p.beta_ambient,
        kind: p.kind.clone(),
        levels: p.levels.clone(),
        initial: p.initial.clone(),
        variant: p.variant.clone(),
        points: p.points,
        t_min: p.t_min,
        t_max: p.t_max,
        beta_min: p.beta_min,
        beta_max: p.beta_max,
        beta_points: p.beta_points,
        samples: p.samples,
        mode: p.mode.clone(),
    };
    cfg.apply(exp, &o);
    let errs = cfg.validate(exp);
    if !errs.is_empty() {
        return Err(CliError::Config(errs));
    }
    cfg.experiment = Some(exp);
    cfg.provenance = None;
    Ok((exp, cfg))
}

/// Runs the requested experiment and writes its outputs and manifest.
/// Files are written even when output invariants fail.
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let (exp, cfg) = resolve_config(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config(vec!["--threads must be at least 1".into()]));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(vec![format!("cannot start worker threads: {e}")]))?;
    let outcome = pool.install(|| experiments::run(exp, &cfg))?;
    write_outputs(&cli.out, &cfg, &outcome)?;
    if !outcome.violations.is_empty() {
        return Err(CliError::Invariant(outcome.violations.clone()));
    }
    Ok(RunReport {
        experiment: exp,
        out_dir: cli.out.clone(),
        config: cfg,
        outcome,
    })
}

/// Manifest: the resolved configuration plus tool version and artifact list.
pub fn manifest(cfg: &Config, outcome: &Outcome) -> Artifact {
    let mut m = cfg.clone();
    m.provenance = Some(Provenance {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        artifacts: outcome.artifacts.iter().map(|a| a.name.clone()).collect(),
    });
    Artifact::new(MANIFEST_NAME, m.to_toml())
}

fn write_outputs(dir: &Path, cfg: &Config, outcome: &Outcome) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(vec![format!("cannot create output directory {}: {e}", dir.display())]))?;
    for a in outcome.artifacts.iter().chain(std::iter::once(&manifest(cfg, outcome))) {
        a.write_to(dir)
            .map_err(|e| CliError::Config(vec![format!("cannot write {}: {e}", dir.join(&a.name).display())]))?;
    }
    Ok(())
}
