//! Library half of the `pacgibbs` binary: configuration parsing and the
//! `simulate`, `fit`, `bounds` and `experiment` commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;

pub use config::{ExperimentConfig, KvConfig};
pub use error::{CliError, CliResult};
pub use experiment::{run_experiment, ExperimentOutput};
