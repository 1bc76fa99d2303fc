//! Command-line front end: configuration, dispatch and file output.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

pub use args::{Cli, Sub};
pub use config::{parse_config, Command, RunConfig};
pub use error::CliError;

fn command_of(sub: &Sub) -> Command {
    match sub {
        Sub::Simulate(_) => Command::Simulate,
        Sub::Sweep(_) => Command::Sweep,
        Sub::Wigner(_) => Command::Wigner,
        Sub::Awf(_) => Command::Awf,
        Sub::Gap(_) => Command::Gap,
        Sub::Fit(_) => Command::Fit,
    }
}

/// Parse the configuration for `cli` and run it.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let sub = &cli.command;
    let config = parse_config(command_of(sub), sub.common().config.as_deref(), sub.overrides())?;
    let workers = match sub {
        Sub::Sweep(a) => a.workers,
        _ => None,
    };
    if workers == Some(0) {
        return Err(CliError::Config("invalid value for `workers`: must be at least 1".into()));
    }
    commands::execute(&config, workers)
}
