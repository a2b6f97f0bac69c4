use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed simplex {0:?}: vertices must be distinct")]
    MalformedSimplex(Vec<usize>),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {kappa} out of range (complex has max dimension {max_dim})")]
    DimensionOutOfRange { kappa: usize, max_dim: isize },

    #[error("no {0}-simplices in the complex")]
    EmptyDimension(usize),

    #[error("empty region")]
    EmptyRegion,

    #[error("empty complex")]
    EmptyComplex,

    #[error("signal length {got} does not match {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("max scale J={requested} exceeds the tree depth p_max={p_max}")]
    ScaleOutOfRange { requested: usize, p_max: usize },

    #[error("need at least two classes, found {0}")]
    SingleClass(usize),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    pub(crate) fn parse(path: impl AsRef<std::path::Path>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { path: path.as_ref().display().to_string(), line, msg: msg.into() }
    }
}
