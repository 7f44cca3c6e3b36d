use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("problem size overflow: N({m}, {n}) does not fit in a machine integer")]
    Sizing { m: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degree {degree} exceeds the configured bound {bound}")]
    DegreeOverflow { degree: usize, bound: usize },

    #[error("multi-index of order {order} is outside an order of degree {bound}")]
    IndexOutOfRange { order: usize, bound: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("direction vector must have unit norm, got {norm}")]
    NonUnitDirection { norm: f64 },

    #[error("frame is not orthonormal: <xi_{i}, xi_{j}> = {value}")]
    NonOrthonormalFrame { i: usize, j: usize, value: f64 },

    #[error("affine map matrix is rank deficient (pivot {pivot:e} in column {column})")]
    RankDeficient { column: usize, pivot: f64 },

    #[error("singular matrix: pivot {pivot:e} in column {column} is below threshold {threshold:e}")]
    SingularMatrix { column: usize, pivot: f64, threshold: f64 },

    #[error("count mismatch: expected {expected} nodes, got {got}")]
    CountMismatch { expected: usize, got: usize },

    #[error(
        "ill-posed geometry: divisor {value:e} at node {node:?} (hyperplane eps={hyperplane}); \
         adjust lambda or kappa"
    )]
    IllPosedGeometry { node: Vec<f64>, hyperplane: String, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("power-law fit needs positive data, got ({x}, {y})")]
    NonPositiveData { x: f64, y: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
