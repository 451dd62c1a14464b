//! Configuration-driven reports over the `degreelab` analyses.

pub mod config;
pub mod output;
pub mod run;

pub use config::{load_config, parse_config, Command, RunConfig};
pub use run::{execute, run, Artifacts, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK};
