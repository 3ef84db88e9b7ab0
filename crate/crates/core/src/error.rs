use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },

    #[error("structural error in {doc}: {message}")]
    Structure { doc: String, message: String },

    #[error("invalid document {doc_id}, field `{field}`: {message}")]
    Validation {
        doc_id: String,
        field: &'static str,
        message: String,
    },

    #[error("duplicate doc_id {0}")]
    DuplicateDoc(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown synset {0}")]
    UnknownSynset(String),

    #[error("unknown mention {0}")]
    UnknownMention(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("similarity {0} outside [0, 1]")]
    SimilarityRange(f64),

    #[error("scope error: {0}")]
    Scope(String),

    #[error("non-finite loss {loss} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize, loss: f64 },

    #[error("non-finite weight at ({row}, {col})")]
    NonFiniteWeight { row: usize, col: usize },

    #[error("model error: {0}")]
    Model(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of numeric origin (divergent training, NaN weights).
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NonFiniteLoss { .. } | Error::NonFiniteWeight { .. } => true,
            Error::Stage { source, .. } => source.is_numeric(),
            _ => false,
        }
    }

    /// True for configuration and usage failures.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) => true,
            Error::Stage { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
