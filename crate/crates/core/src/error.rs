use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = FeecError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FeecError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("non-conforming mesh: {0}")]
    NonConforming(String),

    #[error("degenerate cell {cell}: signed volume {volume:e}")]
    DegenerateCell { cell: usize, volume: f64 },

    #[error("unsupported dimension {0} (only 2 and 3 are supported)")]
    UnsupportedDimension(usize),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("unknown domain `{0}`")]
    UnknownDomain(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("invalid form degree {degree} for ambient dimension {dim}: {reason}")]
    InvalidDegree {
        degree: usize,
        dim: usize,
        reason: &'static str,
    },

    #[error("polynomial degree {0} exceeds the supported maximum")]
    PolyDegreeOverflow(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("cannot access `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical rank is ambiguous: {0}")]
    RankAmbiguous(String),

    #[error("rank-deficient input: {0}")]
    RankDeficient(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error(
        "linear solve did not reach tolerance: relative residual {residual:e} > {tolerance:e}"
    )]
    SolveTolerance { residual: f64, tolerance: f64 },

    #[error("regularity data required: {0}")]
    RegularityDataRequired(String),

    #[error("missing input: {0}")]
    Missing(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl FeecError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FeecError::Io {
            path: path.into(),
            source,
        }
    }
}
