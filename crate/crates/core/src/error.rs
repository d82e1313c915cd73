use std::path::PathBuf;

/// Crate-wide error type. Variants map onto the CLI exit codes:
/// usage errors exit 2, data errors exit 3, numeric errors exit 4.
#[derive(Debug, thiserror::Error)]
pub enum CnfError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("data: {0}")]
    Data(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numeric: non-finite value in {context} (parameter index {index:?})")]
    NonFinite {
        context: String,
        index: Option<usize>,
    },

    #[error("domain: point {0:?} outside the unit domain")]
    OutOfDomain(Vec<f64>),

    #[error("access violation: ground-truth pixels of task {requested} requested at stage {stage}")]
    AccessViolation { requested: usize, stage: usize },
}

impl CnfError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CnfError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CnfError::Data(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CnfError::Io {
            path: path.into(),
            source,
        }
    }

    /// CLI exit code for this error kind.
    pub fn exit_code(&self) -> i32 {
        match self {
            CnfError::Usage(_) | CnfError::AccessViolation { .. } => 2,
            CnfError::Data(_) | CnfError::Io { .. } => 3,
            CnfError::NonFinite { .. } | CnfError::OutOfDomain(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CnfError>;
