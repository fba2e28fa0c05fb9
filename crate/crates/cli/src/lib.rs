//! Library behind the `thinshell` binary: configuration, scan execution,
//! power-law fitting, report emission and diagnostics.

pub mod config;
pub mod diag;
pub mod fit;
pub mod report;
pub mod scan;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Configuration or input-data problem (exit code 2).
    #[error("configuration error: {0}")]
    Config(String),

    /// Runtime failure: I/O, invariant breakage (exit code 2).
    #[error("runtime error: {0}")]
    Runtime(String),

    #[error(transparent)]
    Core(#[from] thinshell::Error),
}
