//! Configuration, sweeps and file output for the `simulate` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use config::{parse_config, resolve, ExperimentConfig, Mode, RawConfig};
pub use error::CliError;
pub use experiment::{run_experiment, RunSummary, Status};
