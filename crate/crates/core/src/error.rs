use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("unsupported dimension: expected {expected}, got {got}")]
    UnsupportedDimension { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("step size too large: {0}")]
    StepSize(String),

    #[error("inconsistent solution: {0}")]
    Consistency(String),

    #[error("certificate undefined: {0}")]
    CertificateUndefined(String),

    #[error("EOT solve for marginal {index} failed: {source}")]
    Marginal {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("NPGD step {iteration} failed: {source}")]
    Step {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::DomainMismatch(msg.into())
    }
}
