use std::io;

/// Errors raised anywhere in the laboratory.
///
/// The variants are coarse on purpose: the CLI maps them onto process exit
/// codes (config errors, missing artifacts, numerical aborts).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {point:?} lies outside the domain {domain}")]
    OutOfDomain { point: Vec<f64>, domain: String },

    #[error("numerical abort: {0}")]
    Numerical(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !($cond) {
            return Err($crate::Error::InvalidArgument(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
