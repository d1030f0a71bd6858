use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("missing artifact: {0}")]
    Missing(String),
    #[error("numerical abort: {0}")]
    Numerical(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Missing(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl From<ssvlab::Error> for CliError {
    fn from(e: ssvlab::Error) -> Self {
        match e {
            ssvlab::Error::InvalidArgument(_) | ssvlab::Error::OutOfDomain { .. } => {
                CliError::Config(e.to_string())
            }
            ssvlab::Error::Numerical(_) => CliError::Numerical(e.to_string()),
            ssvlab::Error::Format(_) => CliError::Missing(e.to_string()),
            ssvlab::Error::Io(_) => CliError::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
