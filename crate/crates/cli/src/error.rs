use thiserror::Error;

/// Failure of a subcommand, carrying the process exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Missing or malformed input: scenario file, flags, manifests.
    #[error("{0}")]
    Input(String),
    /// The model has no stable operating point for the requested load.
    #[error("{0}")]
    Infeasible(String),
    /// A validation comparison failed.
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Failed(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl From<mprcap::Error> for CliError {
    fn from(e: mprcap::Error) -> Self {
        use mprcap::Error as E;
        match e {
            E::InvalidParameter { .. } | E::Json(_) | E::Precondition(_) => CliError::Input(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
