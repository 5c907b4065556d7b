use std::path::PathBuf;

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed or invalid input row.
    #[error("{}, line {line}, column {column}: {message}", file.display())]
    Row {
        file: PathBuf,
        line: u64,
        column: String,
        message: String,
    },

    #[error("{}: {message}", file.display())]
    Input { file: PathBuf, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: vitalrates_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl PipelineError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Io { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        PipelineError::Csv { path: path.into(), source }
    }

    pub(crate) fn model(context: impl Into<String>, source: vitalrates_core::Error) -> Self {
        PipelineError::Model { context: context.into(), source }
    }
}
