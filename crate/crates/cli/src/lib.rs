//! Experiment orchestration for the `credit` command-line tool.

pub mod commands;
pub mod config;
pub mod experiment;

pub use config::{DataSource, ExperimentConfig};
