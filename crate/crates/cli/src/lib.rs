//! Batch driver: TOML configurations in, deterministic CSV out.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod run;

pub use config::SweepConfig;
pub use error::CliError;
pub use run::{execute, Command};
