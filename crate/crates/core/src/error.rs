use std::path::PathBuf;

use crate::dataset::ClassLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: `{field}` {reason}")]
    Config { field: &'static str, reason: String },

    #[error("not enough clean samples of class {class}: need {needed}, found {available} (short by {})", needed - available)]
    InsufficientSamples {
        class: ClassLabel,
        needed: usize,
        available: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("bandwidth {index} is {value}, must be finite and positive")]
    InvalidBandwidth { index: usize, value: f64 },

    #[error("candidate set is empty")]
    EmptyCandidates,

    #[error("unlabeled pool is empty")]
    EmptyPool,

    #[error("no entropy entry for pair ({target}, {given}) at sample {sample}")]
    MissingEntry {
        target: usize,
        given: usize,
        sample: usize,
    },

    #[error("class {0} has no samples")]
    EmptyClass(ClassLabel),

    #[error("unknown class {0}")]
    UnknownClass(ClassLabel),

    #[error("need at least 2 classes, got {0}")]
    TooFewClasses(usize),

    #[error("no foreground class survived filtering")]
    NoForeground,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    Empty,

    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
