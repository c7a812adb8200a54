use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
///
/// Rejected inputs carry enough context (an index, a residual, a line) to
/// locate the offending datum without re-running anything.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("transport solver failed: {message} (row residual {row_residual:e}, column residual {col_residual:e})")]
    Solver {
        message: String,
        row_residual: f64,
        col_residual: f64,
    },

    #[error(
        "sinkhorn did not converge after {iterations} iterations (marginal residual {residual:e})"
    )]
    NotConverged { iterations: usize, residual: f64 },

    #[error("instance of size {size} exceeds the limit of {max}")]
    TooLarge { size: usize, max: usize },

    #[error("source atom {0} has zero mass")]
    ZeroWeightRow(usize),

    #[error("transport plan is not a permutation: {0}")]
    NonPermutationPlan(String),

    #[error("subgradient is ambiguous for pair (source {source_index}, target {target_index}){}", coordinate.map(|c| format!(" at coordinate {c}")).unwrap_or_default())]
    SubgradientTie {
        source_index: usize,
        target_index: usize,
        coordinate: Option<usize>,
    },

    #[error("sample {index} lies outside the grid box")]
    OutOfBox { index: usize },

    #[error("grids differ in box or shape")]
    GridMismatch,

    #[error("grid too coarse: cell masses of the model density sum to {mass}")]
    GridTooCoarse { mass: f64 },

    #[error("reference density vanishes at cell {cell}")]
    ZeroDensity { cell: usize },

    #[error("point is {distance:e} away from the manifold")]
    NotOnManifold { distance: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
