use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is not orthogonal (deviation {0:.3e})")]
    NotOrthogonal(f64),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("design matrix is rank deficient (rank {rank} of {needed})")]
    RankDeficient { rank: usize, needed: usize },
    #[error("unpaired point {0} in antipodal design")]
    Unpaired(usize),
    #[error("data file {file}: {reason}")]
    Data { file: String, reason: String },
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
