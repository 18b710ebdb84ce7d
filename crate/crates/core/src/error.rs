use thiserror::Error;

/// Errors raised by the library. Each variant maps to one CLI exit code.
#[derive(Debug, Error)]
pub enum LabError {
    /// An argument outside the domain of the operation (table range, `N = 0`, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A mathematical hypothesis of the operation is not satisfied by the input.
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// An internal consistency check failed; always a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    /// Short machine-readable tag used in the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Domain(_) => "domain",
            LabError::Precondition(_) => "precondition",
            LabError::Unsupported(_) => "unsupported",
            LabError::Overflow(_) => "overflow",
            LabError::Resource(_) => "resource",
            LabError::Invariant(_) => "invariant",
            LabError::Parse(_) => "parse",
            LabError::Io(_) => "io",
            LabError::Json(_) => "json",
            LabError::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

macro_rules! domain_err {
    ($($arg:tt)*) => { $crate::error::LabError::Domain(format!($($arg)*)) };
}
macro_rules! precondition_err {
    ($($arg:tt)*) => { $crate::error::LabError::Precondition(format!($($arg)*)) };
}
pub(crate) use domain_err;
pub(crate) use precondition_err;
