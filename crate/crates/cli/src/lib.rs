//! Command-line front end for the proximal stochastic solver: dataset
//! loading, experiment configuration, reference solutions, and CSV
//! output. The binary is thin; everything testable lives here.

pub mod config;
pub mod experiment;
pub mod io;

use std::fmt;

use provar_core::solver::SolverError;

/// Errors surfaced by the command-line layer.
#[derive(Debug)]
pub enum CliError {
    /// Invalid or missing settings.
    Config(String),
    /// File reading, writing, or parsing failed.
    Io(io::IoError),
    /// The solver rejected the configuration or aborted the run.
    Solver(SolverError),
}

impl CliError {
    /// Process exit status: 2 for a diverging run, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(SolverError::Diverged { .. }) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(message) => write!(f, "{message}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Config(_) => None,
            CliError::Io(e) => Some(e),
            CliError::Solver(e) => Some(e),
        }
    }
}

impl From<io::IoError> for CliError {
    fn from(e: io::IoError) -> Self {
        CliError::Io(e)
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        CliError::Solver(e)
    }
}
