use thiserror::Error;

/// Errors raised by the kinematics, dynamics and solver layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("positivity violated: {0}")]
    PositivityViolation(String),

    #[error("singular mass matrix (denominator {denominator:e})")]
    SingularMassMatrix { denominator: f64 },

    /// The two-polar chart is singular where the two in-plane stretches coincide.
    #[error("degenerate deformation: lambda = mu = {value}")]
    DegenerateDeformation { value: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("no convergence after {iterations} iterations (residual norm {residual_norm:e})")]
    NoConvergence {
        iterations: usize,
        residual_norm: f64,
        /// Best iterate of the unknown vector.
        best: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
