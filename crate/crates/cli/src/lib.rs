//! Experiment drivers behind the `swae` binary: configuration parsing, SVG
//! plots and the subcommands themselves.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

pub use config::{Dataset, ExperimentConfig};
pub use error::{CliError, CliResult};
