use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("LP iteration limit exceeded after {iterations} pivots")]
    IterationLimit { iterations: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("set is empty: {0}")]
    EmptySet(String),
    #[error("set is unbounded: {0}")]
    Unbounded(String),
    #[error("halfspace intersection is empty; test with `is_empty` before cutting")]
    EmptyIntersection,
    #[error("constraint not redundant: offset {offset} is below the support value {support}")]
    NotRedundant { offset: f64, support: f64 },
    #[error("no template-scaled enclosure exists for the subtrahend")]
    NoEnclosure,
    #[error("generator index {index} out of range for {count} generators")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("matrix is singular or ill-conditioned (condition estimate {0:e})")]
    Singular(f64),
    #[error("every split candidate has infinite cost; increase the admissible linearization error")]
    NoSplitCandidate,
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
