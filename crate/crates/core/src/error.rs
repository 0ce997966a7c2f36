use std::path::PathBuf;

/// Errors produced anywhere in the fitting pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure at (u, v) = ({u}, {v}): {reason}")]
    NumericalFailure { u: f64, v: f64, reason: String },

    #[error("point {index}: {source}")]
    PointFailure {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "control-point system is rank deficient (min pivot {min_pivot:e}, max diagonal {max_diag:e}); use a regularization strength > 0"
    )]
    RankDeficient { min_pivot: f64, max_diag: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("selection is empty")]
    EmptySelection,

    #[error("no boundary surface found within {radius} voxels of {seed:?}")]
    NoSurfaceFound { seed: [usize; 3], radius: usize },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("config field `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Strips iteration/point context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::PointFailure { source, .. } | Error::Iteration { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
