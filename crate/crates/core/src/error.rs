use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("fringe visibility is undefined for all-zero samples")]
    UndefinedVisibility,

    #[error("expectation value is undefined: {0}")]
    UndefinedExpectation(String),

    #[error("degenerate post-selection: success probability {0:e}")]
    DegeneratePostSelection(f64),

    #[error("bootstrap failed: {failed} of {attempted} resamples were rejected by the estimator")]
    BootstrapFailure { failed: usize, attempted: usize },

    #[error("reconstruction did not converge: {0}")]
    NonConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
