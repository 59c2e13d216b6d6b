//! Pipeline orchestration for the `distsem` command.

pub mod artifact;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod sweep;

pub use cli::{run, Cli, Command};
pub use config::{PipelineConfig, Settings};
pub use error::{CliError, CliResult};
