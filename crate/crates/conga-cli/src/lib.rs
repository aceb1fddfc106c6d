//! Configuration-driven front end to the conga library: a registry of test
//! cases, convergence sweeps and plain-text export of errors, traces and
//! sampled fields.

pub mod config;
pub mod domain_file;
pub mod output;
pub mod registry;
pub mod sample;
pub mod sweep;

use std::path::PathBuf;

pub use config::{load_config, RunConfig};
pub use registry::{run_case, CaseReport, CASES};
pub use sweep::{convergence_sweep, ConvergenceReport, ConvergenceRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{context}: {source}")]
    Solver { context: String, source: conga::Error },
}

impl CliError {
    /// 2 for anything the user can fix in the configuration, 3 for failures
    /// inside the numerics, 1 for output I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Read { .. } => 2,
            CliError::Solver { .. } => 3,
            CliError::Write { .. } => 1,
        }
    }
}

/// Attaches a description of the failing step to library errors.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T, CliError>;
}

impl<T, E: Into<conga::Error>> Context<T> for Result<T, E> {
    fn context(self, what: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::Solver { context: what.to_string(), source: e.into() })
    }
}
