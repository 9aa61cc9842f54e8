//! Files, configuration and the command-line front end for `er3bp-core`.
//!
//! - [`table`]: trajectory CSV with exact text round trips
//! - [`svg`]: polyline projections of orbits
//! - [`config`]: flag schema, presets, environment and JSON configuration
//! - [`commands`]: the subcommands

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;
pub mod table;

pub use commands::run;
pub use error::{CliError, CliResult};
