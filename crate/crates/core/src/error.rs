use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A rate or physical parameter is non-finite or outside its allowed range.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// An operation argument (time, frequency, grid, ...) is outside its domain.
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("evaluation at a pole: p = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("no steady state: Rabi frequency {rabi} is below 2*sqrt(2)*J = {threshold}")]
    NoSteadyState { rabi: f64, threshold: f64 },

    #[error("insufficient data: {available} windows, need at least {required}")]
    InsufficientData { available: usize, required: usize },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("grid syntax: {0}")]
    Grid(String),
}
