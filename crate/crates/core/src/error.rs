use thiserror::Error;

use crate::fitml::FitResult;

/// Errors produced by model evaluation, data handling and fitting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid temperature: {0} K (thermodynamic temperature must be > 0)")]
    InvalidTemperature(f64),

    #[error("unit mismatch: {0}")]
    UnitMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("missing condition variable `{0}`")]
    MissingVariable(String),

    #[error("no crossing: threshold ratio D_f/D_inf = {0} is outside (0, 1)")]
    NoCrossing(f64),

    #[error("ill-posed fit: {0}")]
    IllPosedFit(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("inestimable model: {0}")]
    Inestimable(String),

    #[error("optimizer did not converge after {} iterations", .0.iterations)]
    NonConvergence(Box<FitResult>),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("formula error: {0}")]
    Formula(String),

    #[error("time transformation evaluated outside its validity interval at t = {0}")]
    OutsideValidity(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

/// Rejects non-finite or nonpositive values with a domain error naming `what`.
pub(crate) fn ensure_positive(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(domain(format!("{what} must be positive and finite, got {value}")))
    }
}
