//! The five experiment pipelines. Each returns its artifacts in memory;
//! writing and the manifest are handled by the caller.

mod dynamics;
mod fisher;
mod nlevel;
mod spectrum;
mod xi_bound;

use crate::config::{Config, Experiment};
use crate::error::CliError;
use crate::output::Artifact;

pub use dynamics::{run_dynamics, DYNAMICS_CSV_HEADER};
pub use fisher::run_fisher_sweep;
pub use nlevel::{run_nlevel, NLEVEL_QFI_HEADER, NLEVEL_TQFI_HEADER};
pub use spectrum::{run_spectrum, SPECTRUM_CSV_HEADER};
pub use xi_bound::run_xi_bound;

/// Everything one experiment produced.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
    /// Output invariants that failed; a nonempty list means exit code 4.
    pub violations: Vec<String>,
}

pub fn run(exp: Experiment, cfg: &Config) -> Result<Outcome, CliError> {
    match exp {
        Experiment::Dynamics => run_dynamics(cfg),
        Experiment::FisherSweep => run_fisher_sweep(cfg),
        Experiment::Nlevel => run_nlevel(cfg),
        Experiment::XiBound => run_xi_bound(cfg),
        Experiment::Spectrum => run_spectrum(cfg),
    }
}
