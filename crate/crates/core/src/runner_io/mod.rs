//! Configuration, persistence of time series and snapshots, run manifests
//! and the command-line interface.

pub mod cli;
pub mod config;
pub mod manifest;
pub mod run;
pub mod snapshot;
pub mod timeseries;

pub use config::{parse_coefficients, parse_config, ConfigError, ConfigErrorKind, InitialData, RunConfig};
pub use manifest::RunManifest;
pub use run::{diagnose, execute_converge, execute_run, initial_state, RunOutcome};
pub use snapshot::{read_snapshot, read_snapshot_on, write_snapshot, SnapshotError};
pub use timeseries::{read_timeseries, write_timeseries, TimeseriesWriter};

use crate::convergence_lab::ConvergenceError;
use crate::diagnostics::DiagnosticsError;
use crate::dynamics::DynamicsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Convergence(#[from] ConvergenceError),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

pub type Result<T> = std::result::Result<T, RunnerError>;

pub(crate) fn io_context<T>(r: std::io::Result<T>, context: impl FnOnce() -> String) -> Result<T> {
    r.map_err(|source| RunnerError::Io { context: context(), source })
}
