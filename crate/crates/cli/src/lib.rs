//! Command-line harness for `fenchel-duo`: config ingestion, runs, the
//! identity suite, curvature probes, rate fits and comparisons.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod problem;

pub use error::{exit, CliError, CliResult};
