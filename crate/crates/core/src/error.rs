use thiserror::Error;

/// Errors raised by the analytic and Monte Carlo routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature hit its panel budget before reaching tolerance.
    #[error("quadrature did not converge: value {value:e}, error estimate {abs_err:e}")]
    Quadrature { value: f64, abs_err: f64 },

    /// Fourier inversion left an oscillatory tail larger than allowed.
    #[error("Fourier inversion at t={t}, r={r}: tail estimate {tail:e} exceeds tolerance for value {value:e}")]
    Inversion { t: f64, r: f64, value: f64, tail: f64 },

    /// An iterative solver ran out of iterations or could not bracket a root.
    #[error("no convergence: {0}")]
    Convergence(String),

    /// The scaling certificate could not be fitted.
    #[error("scaling fit failed: {0}")]
    Fit(String),

    /// A simplified Green function form was requested outside its regime.
    #[error("regime error: {0}")]
    Regime(String),

    /// Too few surviving paths for a stable estimate.
    #[error("insufficient signal: {0}")]
    InsufficientSignal(String),

    /// Jump-size table construction failed.
    #[error("table construction failed: {0}")]
    Table(String),

    /// Configuration string could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
