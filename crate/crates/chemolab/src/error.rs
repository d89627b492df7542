use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const AUDIT_FAILURE: i32 = 2;
    pub const BLOW_UP: i32 = 3;
    pub const CONFIG: i32 = 4;
    pub const NUMERICAL: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", match .line { Some(l) => format!("line {l}: {}", .message), None => .message.clone() })]
    Config { line: Option<usize>, message: String },
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", .path.display())]
    Csv { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] chemolab_core::Error),
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config {
            line: None,
            message: message.into(),
        }
    }

    pub fn at_line(line: usize, message: impl Into<String>) -> Self {
        CliError::Config {
            line: Some(line),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use chemolab_core::Error as E;
        match self {
            CliError::Config { .. } | CliError::Io { .. } | CliError::Csv { .. } => exit::CONFIG,
            CliError::Core(e) => match e {
                E::LinearSolve { .. }
                | E::NumericalFailure { .. }
                | E::Quadrature { .. }
                | E::Internal(_) => exit::NUMERICAL,
                _ => exit::CONFIG,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
