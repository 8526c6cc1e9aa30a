//! Simulation studies, tick-data ingestion and reporting for the
//! truncated power variation jump-activity tests.
//!
//! The statistics themselves live in [`jump_activity_core`], which is
//! `no_std`; this crate adds threads, files and the command line.

// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod ingest;
pub mod montecarlo;
pub mod report;

pub use jump_activity_core as core;

/// Errors of the std layer. Each variant maps to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] jump_activity_core::Error),
    #[error("input error: {0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// 2 degenerate sample, 3 bad input, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(e) if e.is_degenerate() => 2,
            Error::Core(jump_activity_core::Error::Numerical { .. }) => 4,
            _ => 3,
        }
    }
}
