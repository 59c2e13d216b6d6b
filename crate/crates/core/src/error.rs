use std::io;
use std::path::Path;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced by the embedding toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("vocabulary is empty after filtering")]
    EmptyVocabulary,

    #[error("corpus contains no usable sentences")]
    EmptyCorpus,

    #[error("not in vocabulary: {}", .0.join(", "))]
    OutOfVocabulary(Vec<String>),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("shards were counted over different vocabularies")]
    VocabularyMismatch,

    #[error("non-finite value detected: {0}")]
    NonFinite(String),

    #[error("target names missing from the embedding space: {}", .0.join(", "))]
    MissingTargets(Vec<String>),

    #[error("label `{0}` is not a known province")]
    UnknownLabel(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: "<input>".to_owned(),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Attach a file name to a parse error produced by a reader.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                source_name: path.display().to_string(),
                line,
                message,
            },
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        }
    }

    /// True for errors caused by malformed input or configuration rather than I/O.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::NonFinite(_))
    }
}

impl From<io::Error> for Error {
    fn from(source: io::Error) -> Self {
        Error::Io {
            path: "<stream>".to_owned(),
            source,
        }
    }
}
