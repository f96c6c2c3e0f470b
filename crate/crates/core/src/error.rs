//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("denominator of state {state} evaluates to {value:e} at the given point")]
    DenominatorZero { state: usize, value: f64 },

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("non-finite state encountered at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("unknown benchmark '{0}'")]
    UnknownBenchmark(String),

    #[error("missing parameter '{0}'")]
    MissingParameter(String),

    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("time grid is not uniform (required by this method)")]
    NonUniformGrid,

    #[error("data matrix has no rows")]
    EmptyData,

    #[error("library column {0} is identically zero")]
    ZeroColumn(usize),

    #[error("library has an empty null space; no singular value below {tol:e}")]
    EmptyNullSpace { tol: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("sparse vector is identically zero; lambda = {lambda} is too large")]
    DegenerateLambda { lambda: f64 },

    #[error("active set became rank deficient in sequentially thresholded least squares")]
    RankDeficientActiveSet,

    #[error("all terms eliminated by thresholding at lambda = {lambda}")]
    AllTermsEliminated { lambda: f64 },

    #[error("no valid candidates for Pareto front construction")]
    NoValidCandidates,

    #[error("Pareto front is empty")]
    EmptyFront,

    #[error("no active denominator terms; state may be purely polynomial")]
    NoDenominatorTerms,

    #[error("true model of state {state} needs degree {need}, library only allows {have}")]
    DegreeOverflow {
        state: usize,
        need: usize,
        have: usize,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
