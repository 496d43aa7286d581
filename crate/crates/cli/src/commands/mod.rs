use serde::Deserialize;

use crate::config::{LabConfig, Settings};
use crate::error::LabError;
use crate::report::Report;

pub mod hartree;
pub mod optimality;
pub mod propagate;
pub mod series;
pub mod strichartz;
pub mod transform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::Subcommand)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Analysis/synthesis round trip on random band-limited states
    Transform,
    /// Spectral propagator against the Mehler kernel over a time grid
    Propagate,
    /// Abel-summed fractional series, singular part and remainder
    Series,
    /// Strichartz ratio sweep over seeds and system sizes
    Strichartz,
    /// Coherent-ensemble scaling fit and closed-form oracles
    Optimality,
    /// Hartree trajectory diagnostics
    Hartree,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Transform,
        Command::Propagate,
        Command::Series,
        Command::Strichartz,
        Command::Optimality,
        Command::Hartree,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Propagate => "propagate",
            Command::Series => "series",
            Command::Strichartz => "strichartz",
            Command::Optimality => "optimality",
            Command::Hartree => "hartree",
        }
    }
}

/// Runs one experiment on a pool of `settings.workers` threads.
pub fn run(command: Command, config: &LabConfig, settings: &Settings) -> Result<Report, LabError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers)
        .build()
        .map_err(|e| LabError::Config(format!("workers: {e}")))?;
    let seed = settings.seed;
    pool.install(|| match command {
        Command::Transform => transform::run(&config.transform, seed),
        Command::Propagate => propagate::run(&config.propagate, seed),
        Command::Series => series::run(&config.series),
        Command::Strichartz => strichartz::run(&config.strichartz, seed),
        Command::Optimality => optimality::run(&config.optimality, seed),
        Command::Hartree => hartree::run(&config.hartree, seed),
    })
}

pub(crate) fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Seed of the `i`-th random draw of a run.
pub(crate) fn draw_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}
