//! Crate-wide error type.
//!
//! Every failure carries a short machine-readable code (stable across
//! releases, used by the CLI to build its JSON error envelope) and a
//! human-readable detail string.

use std::fmt;

/// Stable error codes surfaced through the CLI as `{"error": code, ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    /// A parameter is outside its documented domain.
    InvalidParameter,
    /// A bracketing root solve failed to produce a sign change.
    BracketFailed,
    /// An iteration (root polish, quadrature refinement) hit its cap
    /// without meeting its tolerance.
    NoConvergence,
    /// The ODE integrator exceeded its step budget.
    StepLimit,
    /// The integrand or right-hand side produced a non-finite value.
    NonFinite,
    /// An internal consistency check failed (conserved quantity drifted
    /// beyond tolerance, monotonicity violated, ...).
    ConsistencyCheck,
    /// A value is outside the directly representable `f64` range and the
    /// requested operation has no log-space fallback.
    RangeOverflow,
    /// Filesystem or serialization failure while writing artifacts.
    Io,
}

impl ErrorCode {
    /// Short stable string form, e.g. `"invalid_parameter"`.
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::InvalidParameter => "invalid_parameter",
            ErrorCode::BracketFailed => "bracket_failed",
            ErrorCode::NoConvergence => "no_convergence",
            ErrorCode::StepLimit => "step_limit",
            ErrorCode::NonFinite => "non_finite",
            ErrorCode::ConsistencyCheck => "consistency_check",
            ErrorCode::RangeOverflow => "range_overflow",
            ErrorCode::Io => "io",
        }
    }
}

/// Error with a stable code and free-form detail.
#[derive(Debug, Clone)]
pub struct Error {
    pub code: ErrorCode,
    pub detail: String,
}

impl Error {
    pub fn new(code: ErrorCode, detail: impl Into<String>) -> Self {
        Error {
            code,
            detail: detail.into(),
        }
    }

    pub fn invalid_parameter(detail: impl Into<String>) -> Self {
        Error::new(ErrorCode::InvalidParameter, detail)
    }

    pub fn bracket_failed(detail: impl Into<String>) -> Self {
        Error::new(ErrorCode::BracketFailed, detail)
    }

    pub fn no_convergence(detail: impl Into<String>) -> Self {
        Error::new(ErrorCode::NoConvergence, detail)
    }

    pub fn step_limit(detail: impl Into<String>) -> Self {
        Error::new(ErrorCode::StepLimit, detail)
    }

    pub fn non_finite(detail: impl Into<String>) -> Self {
        Error::new(ErrorCode::NonFinite, detail)
    }

    pub fn consistency(detail: impl Into<String>) -> Self {
        Error::new(ErrorCode::ConsistencyCheck, detail)
    }

    pub fn range_overflow(detail: impl Into<String>) -> Self {
        Error::new(ErrorCode::RangeOverflow, detail)
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code.as_str(), self.detail)
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::new(ErrorCode::Io, e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
