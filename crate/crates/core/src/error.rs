use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The variants line up with the CLI exit codes: usage problems map to 2,
/// solver failures to 3 and accuracy failures to 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("degree error: need degree {needed}, only {available} available")]
    Degree { needed: usize, available: usize },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("accuracy error: achieved {achieved:.3e}, requested {requested:.3e} ({context})")]
    Accuracy {
        achieved: f64,
        requested: f64,
        context: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
