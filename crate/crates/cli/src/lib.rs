//! Batch front end for ordtune experiments: TOML configuration with flag
//! overrides, and self-describing CSV and JSON outputs.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_bound_sweep, cmd_engine, cmd_nu_estimate, cmd_oracle_compare, cmd_scenario_compare,
    CliError, Status,
};
pub use config::{ConfigError, ExperimentConfig, Overrides, SourceSpec};
