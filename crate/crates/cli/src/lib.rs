//! Command-line front end for the `cbx` optimizers.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical failure.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_bench, cmd_list, cmd_run, BenchArgs, RunArgs, DEFAULT_TOLERANCE};
pub use config::{parse_config, ConfigFile, OutputSpec, Resolved, TerminationFile};
pub use error::{CliError, ConfigError, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL};
