//! Configuration-driven experiment runner for `snl-core`: TOML scenarios,
//! closed-form coefficient expressions, `.gfd` grid dumps, CSV reports and
//! a rayon executor for the Monte-Carlo probes.

pub mod coefficients;
pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod expr;
pub mod gfd;
pub mod output;

pub use commands::{run, Command, Context};
pub use config::ExperimentConfig;
pub use error::{Error, Result};
