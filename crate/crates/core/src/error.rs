use std::path::PathBuf;

use thiserror::Error;

/// Which half of a semi-supervised dataset an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSide {
    Labeled,
    Unlabeled,
}

impl std::fmt::Display for DataSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DataSide::Labeled => f.write_str("labeled"),
            DataSide::Unlabeled => f.write_str("unlabeled"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("insufficient {side} data: {detail}")]
    InsufficientData { side: DataSide, detail: String },

    #[error("invalid {side} data at row {row}, column {column}: {detail}")]
    Validation {
        side: DataSide,
        row: usize,
        column: usize,
        detail: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular design: {0}; consider the ridge (bridge) nuisance method")]
    SingularDesign(String),

    #[error("sampler failure at sweep {sweep}: {detail}")]
    SamplerFailure { sweep: usize, detail: String },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("replication {replication}: {source}")]
    Replication {
        replication: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: line {line}: {detail}")]
    Parse {
        path: PathBuf,
        line: u64,
        detail: String,
    },

    #[error("header mismatch between labeled and unlabeled files: {0}")]
    HeaderMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn in_fold(self, fold: usize) -> Error {
        Error::Fold {
            fold,
            source: Box::new(self),
        }
    }

    pub fn in_replication(self, replication: usize) -> Error {
        Error::Replication {
            replication,
            source: Box::new(self),
        }
    }

    /// Process exit code: 2 configuration, 3 data, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Fold { source, .. } | Error::Replication { source, .. } => source.exit_code(),
            Error::Config(_) | Error::InvalidParameter(_) => 2,
            Error::SingularDesign(_) | Error::SamplerFailure { .. } => 4,
            Error::EmptyInput(_)
            | Error::InsufficientData { .. }
            | Error::Validation { .. }
            | Error::DimensionMismatch(_)
            | Error::Parse { .. }
            | Error::HeaderMismatch(_)
            | Error::Io { .. } => 3,
        }
    }
}
