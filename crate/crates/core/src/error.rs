use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative method hit its iteration cap.
    #[error("failed to converge: {0}")]
    Convergence(String),

    /// A probability-level invariant was broken by more than rounding can explain.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    /// An exponential-cost oracle was asked for a problem beyond its guard.
    #[error("size exceeded: {0}")]
    SizeExceeded(String),

    /// Adaptive quadrature ran out of depth before meeting its tolerance.
    #[error("quadrature depth exceeded: estimate {estimate:e}, error estimate {err_est:e}")]
    DepthExceeded { estimate: f64, err_est: f64 },

    /// The integrand returned NaN or an infinity.
    #[error("integrand is not finite at {0}")]
    NonFinite(f64),

    /// A bound that must be monotone in the codebook size was observed not to be.
    #[error("monotonicity violation: {0}")]
    MonotonicityViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
