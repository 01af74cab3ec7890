//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by matrix kernels, tuple construction, Koszul assembly,
/// spectrum scans and mapping verification.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A matrix had the wrong shape for the requested operation.
    #[error("shape error: {0}")]
    Shape(String),

    /// A value count or index did not match the declared dimensions.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// An argument fell outside the admissible domain of a scalar function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input specification was invalid (counts, ranges, parse problems).
    #[error("spec error: {0}")]
    Spec(String),

    /// A dense assembly would exceed the configured size guard.
    #[error("size guard: {0}")]
    SizeGuard(String),

    /// A theorem hypothesis required by the requested workflow does not hold.
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    /// A constructed result failed its own integrity check.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// The operation is undefined for this input (distinct from false).
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// An iterative kernel failed to converge within its iteration budget.
    #[error("convergence failure: {0}")]
    Convergence(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
