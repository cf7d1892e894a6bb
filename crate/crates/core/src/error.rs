use std::path::PathBuf;

use crate::eigen::EigenPair;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("column {0} has zero variance and cannot be scaled")]
    ConstantColumn(usize),

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Symmetric factorization hit a pivot below the relative floor.
    #[error("singular system: pivot {pivot} fell below the relative floor")]
    Singular { pivot: usize },

    #[error("columns {0:?} are rank deficient")]
    SingularSubmatrix(Vec<usize>),

    #[error("power iteration did not converge in {max_iter} iterations")]
    NoConvergence { max_iter: usize, best: Box<EigenPair> },

    #[error("matrix is identically zero")]
    ZeroMatrix,

    #[error("support set is empty")]
    EmptySupport,

    #[error("index {index} out of range for {len} variables")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("projection onto the support is numerically zero")]
    ZeroProjection,

    #[error("score vector is zero")]
    ZeroScore,

    #[error("full variable set reaches r2 = {r2}, below target {alpha}")]
    AlphaInfeasible { r2: f64, alpha: f64 },

    #[error("exhaustive search refused for p = {0} (limit {limit})", limit = crate::selection::EXHAUSTIVE_MAX_P)]
    TooLarge(usize),

    #[error("bad support: {0}")]
    BadSupport(String),

    #[error("component {index}: {source}")]
    Component {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at row {row}, column {col}: {token:?}")]
    Parse { row: usize, col: usize, token: String },

    #[error("row {0} has an inconsistent number of fields")]
    RaggedRow(usize),

    #[error("file has no header or no data rows")]
    EmptyFile,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_component(self, index: usize) -> Error {
        match self {
            e @ Error::Component { .. } => e,
            e => Error::Component {
                index,
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Strips any `Component` wrapping.
    pub fn root(&self) -> &Error {
        match self {
            Error::Component { source, .. } => source.root(),
            e => e,
        }
    }
}
