//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by market construction, solvers, and tests.
#[derive(Debug, Error, Clone)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },

    #[error("probabilities sum to {sum}, expected 1 within {tol}")]
    ProbabilityMass { sum: f64, tol: f64 },

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("no portfolio with finite growth exists for this market")]
    Infeasible,

    #[error("objective is unbounded along the hyperplane; ascent direction {direction:?}")]
    Unbounded { direction: Vec<f64> },

    #[error("portfolio value is zero on a positive-probability atom (index {atom})")]
    ZeroPortfolioValue { atom: usize },

    #[error("quadrature did not converge: achieved {achieved}, requested {requested}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("conditional market for state {state} is infeasible: {source}")]
    InfeasibleState {
        state: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("stochastic kernel row {row} is not a distribution: {message}")]
    NonStochasticKernel { row: usize, message: String },

    #[error("marginals differ by {gap}, beyond tolerance {tol}")]
    MarginalMismatch { gap: f64, tol: f64 },

    #[error("active set is empty")]
    EmptyActiveSet,

    #[error("inner solve failed at rho = {rho}: {source}")]
    InnerSolve {
        rho: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
