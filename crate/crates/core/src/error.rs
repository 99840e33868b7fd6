use thiserror::Error;

/// Errors produced by model construction, training and spline solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter violated its documented domain (non-positive scale,
    /// empty vector, mismatched lengths, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The training data does not pin down a unique solution
    /// (e.g. all abscissae coincide).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// A law operation was requested for a family that has no analytic
    /// formula and no attached Monte Carlo estimate.
    #[error("unsupported law family for this operation: {0}")]
    UnsupportedFamily(String),

    /// A solver requires the squared loss but was handed something else.
    #[error("operation requires the squared loss")]
    UnsupportedLoss,

    /// Density or weighting function vanished (or went negative) where a
    /// positive value is required.
    #[error("non-positive density/weight at x = {x}")]
    NonPositiveWeight { x: f64 },

    /// Gradient descent left the stable region.
    #[error("gradient descent diverged (|w| > {bound:.3e}); step size must be below 1/r(X^T X) = {stable_step:.6e}")]
    Diverged { bound: f64, stable_step: f64 },

    /// An iterative solver exhausted its budget.
    #[error("solver did not converge within {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// A linear system that should be positive definite was not.
    #[error("singular or indefinite system: {0}")]
    SingularSystem(String),

    /// Requested probability mass cannot be reached.
    #[error("requested mass {mass} is unreachable for this law")]
    UnreachableMass { mass: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
