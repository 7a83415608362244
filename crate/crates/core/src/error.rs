use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Error raised anywhere in the forecasting pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two tensors (or a tensor and a parameter matrix) disagree on extents.
    Dimension {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    /// A scalar or structural argument is out of its allowed range.
    Argument { op: &'static str, message: String },
    /// A numeric range is empty or inverted (e.g. `lo >= hi`).
    Range { op: &'static str, lo: f64, hi: f64 },
    /// An operation contract was violated (e.g. backward on a non-scalar).
    Contract { op: &'static str, message: String },
    /// A computation produced or received a NaN/Inf where finite values are required.
    NonFinite { op: &'static str, message: String },
    /// Model configuration and parameters do not describe the same architecture.
    Construction { message: String },
    /// A data file violates the sequence CSV schema.
    Ingestion { message: String },
    /// A config file is malformed or self-contradictory.
    Config { message: String },
    /// Training hit a non-finite loss or gradient at the given step.
    Divergence { step: usize },
    /// A checkpoint's format tag or tensor shapes do not match expectations.
    Format { message: String },
    /// Wrapped I/O failure with the path that caused it.
    Io { path: String, message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension { op, left, right } => {
                write!(f, "{op}: dimension mismatch between {left:?} and {right:?}")
            }
            Error::Argument { op, message } => write!(f, "{op}: {message}"),
            Error::Range { op, lo, hi } => write!(f, "{op}: empty range [{lo}, {hi})"),
            Error::Contract { op, message } => write!(f, "{op}: contract violation: {message}"),
            Error::NonFinite { op, message } => write!(f, "{op}: non-finite value: {message}"),
            Error::Construction { message } => write!(f, "model construction: {message}"),
            Error::Ingestion { message } => write!(f, "data ingestion: {message}"),
            Error::Config { message } => write!(f, "config: {message}"),
            Error::Divergence { step } => write!(f, "training diverged at step {step}"),
            Error::Format { message } => write!(f, "checkpoint format: {message}"),
            Error::Io { path, message } => write!(f, "io error on {path}: {message}"),
        }
    }
}

impl std::error::Error for Error {}

impl Error {
    pub fn io(path: impl Into<String>, err: impl fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
