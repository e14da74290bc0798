use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by scenario construction, channel assembly, and the
/// solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration field violates its documented invariant.
    InvalidConfig(String),
    /// Matrix dimensions passed to an operation do not agree.
    DimensionMismatch(String),
    /// A channel or combiner matrix contains non-finite entries.
    NonFinite(&'static str),
    /// `A + tau * mu` lost column rank, so the QR retraction is undefined.
    DegenerateStep,
    /// An objective trace decreased beyond tolerance; indicates a bug, not a
    /// recoverable condition.
    MonotonicityViolation {
        context: &'static str,
        iter: usize,
        prev: f64,
        curr: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::NonFinite(what) => write!(f, "non-finite values in {what}"),
            Error::DegenerateStep => write!(f, "degenerate retraction step (rank-deficient)"),
            Error::MonotonicityViolation {
                context,
                iter,
                prev,
                curr,
            } => write!(
                f,
                "objective decreased in {context} at iteration {iter}: {prev} -> {curr}"
            ),
        }
    }
}

impl std::error::Error for Error {}
