use thiserror::Error;

/// Errors raised by group calculus, solvers and the experiment pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands belong to different groups.
    #[error("group mismatch: {0} vs {1}")]
    GroupMismatch(String, String),

    /// A tangent vector is based at the wrong point for the operation.
    #[error("tangent base mismatch: {0}")]
    BaseMismatch(String),

    /// The group logarithm was requested outside the maximal normal convex
    /// neighborhood (relative rotation angle >= pi - 1e-6).
    #[error("outside maximal normal convex neighborhood (rotation angle {angle} >= pi - 1e-6)")]
    BranchCut { angle: f64 },

    /// A matrix fails the structural invariants of its group.
    #[error("invalid group element: {0}")]
    InvalidPoint(String),

    /// Caller violated an operation precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// All data points coincide; R^2 is undefined.
    #[error("undefined R^2: total variance is zero")]
    UndefinedRSquared,

    /// Principal directions are ambiguous (near-degenerate covariance spectrum).
    #[error("degenerate covariance spectrum: {0}")]
    DegenerateSpectrum(String),

    /// File parsing / IO failure.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
