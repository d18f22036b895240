use std::fmt;

use thiserror::Error;

/// Which half of the two-term Bayes-factor estimator a failure belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Left,
    Right,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Left => f.write_str("left"),
            Term::Right => f.write_str("right"),
        }
    }
}

#[derive(Debug, Error)]
pub enum SdrError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{term} evaluator returned {value} at draw {index}")]
    BadEvaluation { term: Term, index: usize, value: f64 },

    #[error("left and right terms must use distinct seeds (both were {0})")]
    SharedSeed(u64),

    #[error("non-finite allocation weight for observation {index}")]
    NonFiniteWeight { index: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular covariance: {0}")]
    Singular(String),

    #[error("replicate {index} failed: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<SdrError>,
    },
}

pub type Result<T, E = SdrError> = std::result::Result<T, E>;
