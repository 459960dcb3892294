//! Config-driven experiment runner: single runs, multi-seed averages,
//! parameter sweeps, CSV output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{ExperimentConfig, LoadedConfig, SweepAxis};
pub use error::{CliError, Result};
