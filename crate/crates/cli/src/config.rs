use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::commands::Command;
use crate::error::LabError;

pub const WORKERS_ENV: &str = "HERMITE_LAB_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Contents of a TOML configuration file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub transform: TransformConfig,
    #[serde(default)]
    pub propagate: PropagateConfig,
    #[serde(default)]
    pub series: SeriesConfig,
    #[serde(default)]
    pub strichartz: StrichartzConfig,
    #[serde(default)]
    pub optimality: OptimalityConfig,
    #[serde(default)]
    pub hartree: HartreeSection,
}

impl LabConfig {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            LabError::Config(m) => LabError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// Run-wide settings after merging flags, environment and file.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub output: PathBuf,
    pub format: Format,
    pub workers: usize,
}

impl Settings {
    /// Flags win over the environment, which wins over the file.
    pub fn resolve(
        file: &LabConfig,
        seed: Option<u64>,
        output: Option<PathBuf>,
        format: Option<Format>,
        workers: Option<usize>,
    ) -> Result<Self, LabError> {
        let env_workers = match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                LabError::Config(format!("{WORKERS_ENV}: expected a positive integer, got {v:?}"))
            })?),
            Err(_) => None,
        };
        let workers = workers
            .or(env_workers)
            .or(file.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            return Err(LabError::Config("workers: must be at least 1".into()));
        }
        Ok(Self {
            seed: seed.or(file.seed).unwrap_or(0),
            output: output.or_else(|| file.output.clone()).unwrap_or_else(|| PathBuf::from(".")),
            format: format.or(file.format).unwrap_or_default(),
            workers,
        })
    }
}

pub(crate) fn field_error(section: &str, key: &str, reason: impl std::fmt::Display) -> LabError {
    LabError::Config(format!("[{section}] {key}: {reason}"))
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformConfig {
    pub k_max: usize,
    pub nodes: usize,
    pub states: usize,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            k_max: 64,
            nodes: 129,
            states: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagateConfig {
    /// Band of the random initial states.
    pub degree: usize,
    /// Band of the basis the kernel quadrature runs on.
    pub k_max: usize,
    pub nodes: usize,
    pub states: usize,
    pub times: Vec<f64>,
    /// Second time used for the group-law check.
    pub group_shift: f64,
    pub half_width: f64,
    pub targets: usize,
    pub singular_margin: f64,
}

impl Default for PropagateConfig {
    fn default() -> Self {
        Self {
            degree: 32,
            k_max: 64,
            nodes: 257,
            states: 20,
            times: vec![0.3, 0.7, 1.2],
            group_shift: 1.1,
            half_width: 6.0,
            targets: 121,
            singular_margin: hermite_core::propagator::DEFAULT_SINGULAR_MARGIN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesConfig {
    /// Real parts of the exponents z.
    pub z: Vec<f64>,
    /// Imaginary part shared by every z.
    pub z_imag: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub slope_t_min: f64,
    pub slope_t_max: f64,
    pub slope_points: usize,
    pub tolerance: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            z: vec![-0.25, -0.5, -0.75],
            z_imag: 0.0,
            t_min: 1e-3,
            t_max: 1.0,
            t_points: 31,
            slope_t_min: 1e-3,
            slope_t_max: 1e-1,
            slope_points: 21,
            tolerance: hermite_core::series::DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Random orthonormal basis of span{Φ_0..Φ_{J-1}}.
    Saturated,
    /// Random J-dimensional subspace of span{Φ_0..Φ_K}.
    FixedBand,
    /// The single state Φ_0 (J = 1).
    Ground,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrichartzConfig {
    pub seeds: usize,
    pub j: Vec<usize>,
    pub q: f64,
    pub family: Family,
    /// Band limit for the fixed-band family.
    pub k_max: usize,
    /// Non-critical Schatten exponent for comparison.
    pub alt_exponent: f64,
}

impl Default for StrichartzConfig {
    fn default() -> Self {
        Self {
            seeds: 100,
            j: vec![1, 2, 4, 8, 16, 32],
            q: 3.0,
            family: Family::Saturated,
            k_max: 64,
            alt_exponent: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimalityConfig {
    pub p: f64,
    pub q: f64,
    /// Schatten exponents of the scaling table.
    pub r: Vec<f64>,
    /// Scaling points β = 1, μ = L² = 10^m for m in [m_min, m_max].
    pub m_min: f64,
    pub m_max: f64,
    pub m_points: usize,
    /// Parameters (β, L, μ) of the matrix and phase-space oracles.
    pub oracle: [f64; 3],
    pub matrix_k_max: usize,
    pub matrix_nodes: usize,
    pub oracle_nodes: usize,
    pub oracle_points: usize,
    /// (β, L, μ) sets for the closed-form mixed-norm check.
    pub check_params: Vec<[f64; 3]>,
    pub quadrature_time_points: usize,
    pub quadrature_space_nodes: usize,
    /// (x, ξ, β, t) of the coherent-state propagation check.
    pub coherent: [f64; 4],
    pub coherent_k_max: usize,
}

impl Default for OptimalityConfig {
    fn default() -> Self {
        Self {
            p: 3.0,
            q: 3.0,
            r: vec![2.0, 3.0, 1.5],
            m_min: 1.0,
            m_max: 6.0,
            m_points: 6,
            oracle: [0.5, 3.0, 3.0],
            matrix_k_max: 96,
            matrix_nodes: 96,
            oracle_nodes: 96,
            oracle_points: 20,
            check_params: vec![
                [0.5, 2.0, 2.0],
                [1.0, 3.0, 5.0],
                [0.3, 1.5, 4.0],
                [2.0, 4.0, 1.0],
                [1.0, 10.0, 100.0],
            ],
            quadrature_time_points: 512,
            quadrature_space_nodes: 128,
            coherent: [1.0, 0.5, 0.2, 0.4],
            coherent_k_max: 96,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HartreeSection {
    pub k_max: usize,
    /// Band of the random initial system.
    pub initial_degree: usize,
    pub weights: Vec<f64>,
    pub kernel: KernelChoice,
    pub amplitude: f64,
    pub width: f64,
    pub kernel_spacing: f64,
    pub kernel_samples: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    pub half_width: f64,
    pub points: usize,
    pub band_tolerance: f64,
    pub energy_dts: Vec<f64>,
    pub energy_time: f64,
    pub return_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    Gaussian,
    Tabulated,
}

impl Default for HartreeSection {
    fn default() -> Self {
        Self {
            k_max: 31,
            initial_degree: 3,
            weights: vec![1.0, 0.5],
            kernel: KernelChoice::Gaussian,
            amplitude: 0.5,
            width: 1.0,
            kernel_spacing: 0.1,
            kernel_samples: Vec::new(),
            dt: 5e-3,
            steps: 1000,
            half_width: 10.0,
            points: 401,
            band_tolerance: hermite_core::hartree::DEFAULT_BAND_TOLERANCE,
            energy_dts: vec![1e-2, 5e-3, 2.5e-3],
            energy_time: 1.0,
            return_steps: 100,
        }
    }
}
