use thiserror::Error;

/// Failures, each tied to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 4,
        }
    }
}

impl From<ergolab::Error> for CliError {
    fn from(e: ergolab::Error) -> Self {
        use ergolab::Error as E;
        match e {
            E::CapacityExceeded(_) | E::CapExceeded { .. } | E::SamplingFailed(_) | E::DegenerateObservable => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}
