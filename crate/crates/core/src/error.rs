use thiserror::Error;

/// Errors raised by the estimators, tuning routines and harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("column {0} has zero variance")]
    ZeroVarianceColumn(usize),

    #[error("input contains a non-finite value")]
    NonFinite,

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("X'X is numerically singular (pivot {pivot:.3e} at column {column})")]
    SingularGram { column: usize, pivot: f64 },

    #[error("GCV trace term is not positive (n <= p with lambda = 0)")]
    DegenerateTrace,

    #[error("residual degrees of freedom must be at least 1 (n = {n}, p = {p})")]
    InsufficientDof { n: usize, p: usize },

    #[error("solver hit the iteration cap of {cap} (residual {residual:.3e})")]
    IterationLimit { cap: usize, residual: f64 },

    #[error("invalid gamma {gamma} for {family}")]
    InvalidGamma { family: &'static str, gamma: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fold layout invalid: {0}")]
    FoldTooSmall(String),

    #[error("cannot aggregate an empty group")]
    EmptyGroup,

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures caused by the numbers rather than by malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularGram { .. }
                | Error::DegenerateTrace
                | Error::InsufficientDof { .. }
                | Error::IterationLimit { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
