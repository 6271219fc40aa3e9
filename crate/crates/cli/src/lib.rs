//! Configuration, orchestration and serialization for the `squeeze` binary.

pub mod config;
pub mod error;
pub mod run;

pub use config::{load_config, parse_config, ExperimentConfig, Kind, Overrides};
pub use error::CliError;
pub use run::{run, RunSummary};
