//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("k = {k} must satisfy 1 <= k < n (n = {n})")]
    KOutOfRange { k: usize, n: usize },

    /// All neighbor radii equal, all surrogate terms discarded, or a similar
    /// configuration that leaves an estimator without usable information.
    #[error("degenerate neighborhood: {0}")]
    DegenerateNeighborhood(&'static str),

    /// A zero-radius neighbor signals that deduplication was skipped.
    #[error("duplicate rows: zero-radius neighbor found at row {row}")]
    DuplicateRows { row: usize },

    #[error("all points are fully separable: p-bar is zero over the whole alpha grid")]
    FullySeparable,

    #[error("zero-variance input: largest covariance eigenvalue is not positive")]
    ZeroVariance,

    #[error("land mask rejected {0} consecutive draws; is the mask all water?")]
    MaskExhausted(u64),

    #[error("lambert w0: argument {0} is below the branch point -1/e")]
    LambertDomain(f64),

    #[error("eigendecomposition failed: lapack dsyevd info = {0}")]
    Eigen(i32),

    /// Malformed input file: bad magic, truncated payload, non-finite entry.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Coarse classification used by callers that map errors to process exit
    /// codes: configuration (2), degenerate data (3), input/output (4).
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::EmptyInput(_)
            | Error::InvalidParameter(_)
            | Error::KOutOfRange { .. }
            | Error::LambertDomain(_) => ErrorCategory::Config,
            Error::DegenerateNeighborhood(_)
            | Error::DuplicateRows { .. }
            | Error::FullySeparable
            | Error::ZeroVariance
            | Error::MaskExhausted(_)
            | Error::Eigen(_) => ErrorCategory::DegenerateData,
            Error::Format(_) | Error::Io(_) => ErrorCategory::Io,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    DegenerateData,
    Io,
}
