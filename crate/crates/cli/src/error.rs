//! CLI errors and their process exit codes.

use std::path::PathBuf;

use thiserror::Error;

use hypstab_core::Error as SolverError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("smallness conditions fail on edges {0:?}; rerun with --force to simulate anyway")]
    Conditions(Vec<usize>),

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for failed conditions, 3 when a solver gives up, 4 for I/O, 1 for
    /// everything else (bad input).
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Conditions(_) => 2,
            CliError::Io { .. } | CliError::Csv { .. } => 4,
            CliError::Solver(e) => match e.root_cause() {
                SolverError::NoConvergence { .. }
                | SolverError::WorkingBoxExit { .. }
                | SolverError::CoefficientSignLoss { .. }
                | SolverError::CouplingResidualExceeded { .. }
                | SolverError::NewtonFailure(_)
                | SolverError::DepthCollapse(_)
                | SolverError::BoxExit(_) => 3,
                _ => 1,
            },
            CliError::Parse { .. } | CliError::Scenario(_) => 1,
        }
    }
}
