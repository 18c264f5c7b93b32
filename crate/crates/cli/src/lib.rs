//! Files, CSV ingestion, experiments and the command-line front end for the
//! `dualscore-core` estimator.
//!
//! - [`table`]: schema-driven CSV loading and train-split preprocessing.
//! - [`config`]: `key = value` run configuration.
//! - [`format`]: versioned model, expert and truth files and grid exports.
//! - [`experiment`]: convergence sweeps and optimizer benchmarks.
//! - [`cli`] and [`commands`]: the `dualscore` executable.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod format;
pub mod fsio;
pub mod table;

pub use error::{CliError, CliResult, ErrorKind};
