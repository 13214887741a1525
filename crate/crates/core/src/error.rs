use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed rational {0:?}")]
    BadRational(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("parse error at line {line}, column {col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("asymmetric distances at ({i},{j})/({j},{i})")]
    Asymmetric { i: usize, j: usize },
    #[error("nonzero diagonal entry at ({0},{0})")]
    NonzeroDiagonal(usize),
    #[error("nonpositive distance at ({i},{j})")]
    Nonpositive { i: usize, j: usize },
    #[error("a metric space needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("not a metric: {0}")]
    NotMetric(String),
    #[error("point set is not full-dimensional: affine rank {rank}, expected {expected}")]
    NotFullDimensional { rank: usize, expected: usize },
    #[error("the origin is not an interior point of the hull")]
    OriginNotInterior,
    #[error("vector coordinates sum to {0}, expected 0")]
    NonzeroSum(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("registries are incompatible: {0}")]
    IncompatibleRegistries(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
