use crate::kronecker::AdmissibilityFlags;
use thiserror::Error;

/// Errors raised by grid construction, basis evaluation and experiment runs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid subsequence: {0}")]
    InvalidSubsequence(String),

    #[error("coordinate {0} outside the half-open interval [0, 1)")]
    OutsideDomain(f64),

    #[error("resolution {resolution} too coarse for basis index {index}; need at least {required} cells per axis")]
    ResolutionTooCoarse {
        resolution: usize,
        index: usize,
        required: usize,
    },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("weight grid value {value} at ({j}, {k}) is not positive")]
    NonPositiveWeight { j: usize, k: usize, value: f64 },

    #[error("weight grid fails admissibility: {0:?}")]
    InadmissibleWeight(AdmissibilityFlags),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable tag for the error kind, used in `error.json`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_) => "invalid_dimension",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InvalidSubsequence(_) => "invalid_subsequence",
            Error::OutsideDomain(_) => "outside_domain",
            Error::ResolutionTooCoarse { .. } => "resolution_too_coarse",
            Error::IndexOutOfRange(_) => "index_out_of_range",
            Error::NonPositiveWeight { .. } => "non_positive_weight",
            Error::InadmissibleWeight(_) => "inadmissible_weight",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
