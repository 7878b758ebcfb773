use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two objects built over different bases were combined.
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    /// A dense routine was asked to handle a dimension above its cap.
    #[error("capacity exceeded: dimension {dim} is above the dense cap {cap}")]
    Capacity { dim: usize, cap: usize },

    /// A numerical consistency check failed (Hermiticity, norm drift, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The Krylov propagator could not reach the requested accuracy.
    #[error("iteration failed to converge: {message} (residual {residual:e})")]
    Convergence { message: String, residual: f64 },

    /// `<psi|M|psi> / ||M psi||` is undefined because `||M psi|| = 0`.
    #[error("degenerate overlap metric: ||M psi|| = {0:e}")]
    DegenerateMetric(f64),

    /// Invalid experiment configuration; `path` names the offending key.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
