//! File formats, experiment runner and comparison reports for `gesmr`.
//!
//! A run is described by a JSON [`RunConfig`]; [`run`] executes it once per
//! seed and writes `manifest.json` (the resolved config) plus one
//! `trace_seed_{seed}.csv` per seed into an output directory. [`compare`]
//! reduces such directories to final-elite, mean-elite and log-MR-MSE tables.

use std::path::PathBuf;

pub mod config;
pub mod report;
pub mod runner;
pub mod tables;
pub mod trace;

pub use config::{Algorithm, RunConfig};
pub use report::{compare, ReportRow, TraceSet};
pub use runner::{run, RunArtifacts};
pub use trace::TraceRow;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config not found: {}", .0.display())]
    ConfigNotFound(PathBuf),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Core(#[from] gesmr::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
