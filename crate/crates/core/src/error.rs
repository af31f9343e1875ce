use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix `{name}` contains a non-finite entry at ({row}, {col})")]
    NonFinite {
        name: String,
        row: usize,
        col: usize,
    },

    #[error("matrix is singular to working precision (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("shifted pencil is singular at interpolation point #{index} ({point}): condition estimate {condition:.3e}")]
    SingularShift {
        index: usize,
        point: String,
        condition: f64,
    },

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("invalid interpolation data: {0}")]
    InterpolationData(String),

    #[error("degenerate projection basis: {0}")]
    DegenerateBasis(String),

    #[error("polynomial parts do not match: {0}")]
    PolynomialMismatch(String),

    #[error("invalid benchmark specification: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
