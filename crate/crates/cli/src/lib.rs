//! Command-line front end for k-NN directed information estimation:
//! single estimates and order selection on CSV input, synthetic data
//! generation, and seeded sweep experiments with CSV and SVG reports.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod input;
pub mod plot;
pub mod summary;

pub use error::{CliError, Result};
pub use experiment::{run_experiment, ExperimentSpec};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "DIKNN_THREADS";

/// Sizes the global worker pool from `DIKNN_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot start {threads} worker threads: {e}")))
}
