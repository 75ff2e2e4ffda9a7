use thiserror::Error;

/// Failures raised by the solvers and parameter computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("speed window undefined: chi = {chi} is not below the threshold chi* = {chi_star}")]
    WindowUndefined { chi: f64, chi_star: f64 },

    #[error("no admissible wave number for speed {c}: {reason}")]
    NoRoot { c: f64, reason: String },

    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("singular tridiagonal system at row {0}")]
    Singular(usize),

    /// The time-marching limit did not settle before `t_max`.
    #[error("long-time limit not reached by t = {t}: last sup-norm change {change:.3e}")]
    BudgetExceeded { t: f64, change: f64, last: Vec<f64> },

    #[error("fixed-point iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize, history: Vec<f64> },

    #[error("solution diverged at t = {t}: sup-norm {norm:.3e}")]
    Divergence { t: f64, norm: f64 },

    #[error("no eigen-construction: {0}")]
    NoConstruction(String),

    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
