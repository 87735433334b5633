//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Gauss control matrix is singular for this state; names the
    /// offending element.
    #[error("singular control matrix: {element} = {value:.3e} below guard {guard:.3e}")]
    Singular {
        element: &'static str,
        value: f64,
        guard: f64,
    },

    /// State is not a bound elliptical orbit (parabolic/hyperbolic or
    /// below the surface).
    #[error("unsupported orbital regime: {0}")]
    UnsupportedRegime(String),

    /// A maneuver design request cannot be satisfied.
    #[error("infeasible plan: {0}")]
    Infeasible(String),

    /// Numerical propagation violated an element invariant.
    #[error("propagation failed at t = {epoch:.3} s: {reason}")]
    Propagation { epoch: f64, reason: String },

    /// A matrix operation lost rank or positive definiteness.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An iterative solver did not converge.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// Structural mismatch in tensor/vector dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid configuration or input file.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than runtime failure.
    /// The CLI maps these to exit code 1, everything else to 2.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Json(_))
    }
}
