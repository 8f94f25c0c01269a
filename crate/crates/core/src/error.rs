use crate::sdp::SdpSolution;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("truncation too small: {0}")]
    Truncation(String),
    #[error("normalization mismatch: {0}")]
    Normalization(String),
    #[error("semidefinite solver did not converge after {} iterations (residual {:.3e})", .0.iterations, .0.primal_residual)]
    NotConverged(Box<SdpSolution>),
    #[error("config error: {0}")]
    Config(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotConverged(_) => 4,
            Error::InvalidData(_) | Error::Parse { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
