use std::path::PathBuf;

use thiserror::Error;

use crate::lp::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Csv {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row-count mismatch: {decision} decision rows vs {objective} objective rows")]
    RowCountMismatch { decision: usize, objective: usize },

    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("simplex guard exceeded: projected {projected} simplices > cap {cap}")]
    SimplexCapExceeded { projected: u128, cap: u64 },

    #[error("complex too large for the rank oracle: {size} simplices > {cap}")]
    OracleTooLarge { size: usize, cap: usize },

    #[error("sampler produced {produced} non-dominated points, {requested} requested")]
    InsufficientSample { produced: usize, requested: usize },

    #[error("S2 requires objectives")]
    MissingObjectives,

    #[error(transparent)]
    Lp(#[from] LpError),
}
