use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),
    #[error("input contains non-finite values")]
    NonFiniteInput,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("need at least as many rows as columns, got {rows}x{cols}")]
    Underdetermined { rows: usize, cols: usize },
    #[error("singular value spectrum is empty")]
    EmptySpectrum,
    #[error("inlier set became empty")]
    EmptyInlierSet,
    #[error("every IRLS weight vanished")]
    AllZeroWeights,
    #[error("true coefficient vector has zero norm")]
    ZeroTruth,
    #[error("trace has {len} iterations, need at least {required}")]
    TooShort { len: usize, required: usize },
    #[error("fit was run without trace recording")]
    NoTrace,
    #[error("method {0} needs information the trial does not provide")]
    MissingInput(&'static str),
    #[error(transparent)]
    Load(#[from] crate::loadcast::LoadError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
