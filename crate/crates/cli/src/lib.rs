//! Experiment harness for the `spectrwm` jump-process library.

pub mod config;
pub mod csv;
pub mod error;
pub mod experiments;

pub use config::{Cli, Experiment, ExperimentConfig, SEED_ENV};
pub use csv::{emit_csv, read_csv, Cell, Table};
pub use error::{CliError, CliResult};
pub use experiments::{run_experiment, Report, Verdict};
