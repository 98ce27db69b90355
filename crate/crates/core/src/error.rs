use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("frame dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("degree mismatch: {0}")]
    Degree(String),

    #[error("form is not real")]
    NotReal,

    #[error("structure equations are not holomorphically parallelizable")]
    NotParallelizable,

    #[error("invalid structure equations: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error("form is not strictly positive (smallest eigenvalue {0:e})")]
    NotStrictlyPositive(f64),

    #[error("inversion residual {0:e} exceeds tolerance")]
    InversionResidual(f64),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("ladder hypotheses violated: {}", .0.join("; "))]
    Hypothesis(Vec<String>),

    #[error("form is not closed: {0}")]
    NotClosed(String),

    #[error("certificate rejected: {0}")]
    Certificate(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
