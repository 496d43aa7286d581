//! Batch runner for the Hermite-operator experiments.
//!
//! Every run is fully determined by its TOML configuration and seed. A run
//! writes one machine-readable table (CSV or JSON) and a plain-text summary
//! listing the checks it performed.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod report;

pub use commands::{run, Command};
pub use config::{Format, LabConfig, Settings};
pub use error::LabError;
pub use report::{Cell, Check, Report, Table};
