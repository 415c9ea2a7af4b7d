use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum DunklError {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Kernel evaluation was requested on (or too close to) a genuine singularity.
    #[error("singular evaluation: {0}")]
    Singular(String),

    /// An iterative or extrapolated computation failed to converge.
    #[error("did not converge: {0}")]
    NonConvergent(String),

    /// The input shape is outside what the implementation supports.
    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// A constructor could not build a valid object from the given data.
    #[error("construction failed: {0}")]
    Construction(String),

    /// A truncated integral has a provably or empirically non-integrable tail.
    #[error("tail divergence: {0}")]
    TailDivergence(String),
}

pub type Result<T> = std::result::Result<T, DunklError>;
