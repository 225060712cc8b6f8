//! Configuration parsing, file formats and subcommands behind the `swarmcharge` binary.

pub mod commands;
pub mod config;
pub mod records;

pub use commands::{cmd_run, cmd_sweep, CliError, RunArgs, SweepArgs, SweepOutcome};
pub use config::{parse_config, parse_config_str, ConfigError};
