//! Command-line front-end: JSON experiment configs and the `synth`, `train`,
//! `eval`, `surface`, `gradcheck` and `sweep` subcommands.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

pub use config::ExperimentConfig;
pub use error::CliError;
