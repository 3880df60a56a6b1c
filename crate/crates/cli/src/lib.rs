//! Command-line front end: JSON configuration, CSV output and plot scripts.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;

pub use commands::run_command;
pub use config::{load_config, RunConfig};
pub use error::CliError;
