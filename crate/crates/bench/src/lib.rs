//! Experiment harness: JSON configs, parallel seeded runs, JSON-lines
//! records and CSV summaries.

pub mod config;
pub mod error;
pub mod records;
pub mod runner;
pub mod summary;

pub use config::ExperimentConfig;
pub use error::{BenchError, Result};
pub use runner::{run_experiment, RunOptions};
