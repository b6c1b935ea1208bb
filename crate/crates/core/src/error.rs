use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the pipeline. Variants carry enough context to name
/// the offending file, net, or configuration value in diagnostics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at {context}: {message}")]
    Parse {
        path: PathBuf,
        /// Line/column or record/field position, whichever the format has.
        context: String,
        message: String,
    },

    #[error("invalid design `{design}`: {message}")]
    InvalidDesign { design: String, message: String },

    #[error("infeasible macro packing: {0}")]
    InfeasiblePacking(String),

    #[error("unroutable net `{net}`: {message}")]
    UnroutableNet { net: String, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("feature schema mismatch: model has {model}, rows have {rows}")]
    SchemaMismatch { model: String, rows: String },

    #[error("unsupported model file version `{0}`")]
    ModelVersion(String),

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), context: context.into(), message: message.into() }
    }
}
