//! Configuration parsing and the experiment runner behind `hdgml`.

pub mod config;
pub mod run;

pub use config::{Config, ConfigError};
pub use run::{run, Command, Mode, Outcome, RunError, RunOptions};
