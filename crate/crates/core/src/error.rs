use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Kinds of ingestion failures. Every variant maps to a distinct,
/// documented error class so callers can match on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// No `@data` directive before end of input.
    MissingData,
    /// A required header directive is absent or malformed.
    BadHeader(String),
    /// `@equalLength false` was declared.
    UnequalLength,
    /// `@timeStamps true` was declared.
    TimestampsUnsupported,
    /// A channel's length differs from the declared series length.
    RaggedLength { expected: usize, found: usize },
    /// A record has the wrong number of channels or fields.
    FieldCount { expected: usize, found: usize },
    /// A class label not declared in the header.
    UnknownLabel(String),
    /// A cell that does not parse as a finite real.
    NonNumeric(String),
    /// The same identifier appears twice.
    DuplicateId(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::MissingData => write!(f, "missing @data section"),
            ParseErrorKind::BadHeader(msg) => write!(f, "bad header: {msg}"),
            ParseErrorKind::UnequalLength => write!(f, "unequal-length series are not supported"),
            ParseErrorKind::TimestampsUnsupported => {
                write!(f, "timestamped series are not supported")
            }
            ParseErrorKind::RaggedLength { expected, found } => {
                write!(f, "ragged channel length: expected {expected}, found {found}")
            }
            ParseErrorKind::FieldCount { expected, found } => {
                write!(f, "wrong field count: expected {expected}, found {found}")
            }
            ParseErrorKind::UnknownLabel(l) => write!(f, "unknown class label {l:?}"),
            ParseErrorKind::NonNumeric(v) => write!(f, "non-numeric value {v:?}"),
            ParseErrorKind::DuplicateId(id) => write!(f, "duplicate id {id:?}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },

    #[error("classifier fit failed: {0}")]
    Fit(String),

    #[error("prediction failed: {0}")]
    Prediction(String),

    #[error("no nearest unlike neighbor")]
    NoUnlikeNeighbor,

    #[error("missing feature weights for instance {0:?}")]
    MissingWeights(String),

    #[error("{0} is undefined: no counterfactuals to aggregate")]
    Undefined(&'static str),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, kind: ParseErrorKind) -> Self {
        Error::Parse { line, kind }
    }

    /// The parse error kind, if this is an ingestion error.
    pub fn parse_kind(&self) -> Option<&ParseErrorKind> {
        match self.root() {
            Error::Parse { kind, .. } => Some(kind),
            _ => None,
        }
    }

    /// Attach the file the error came from.
    pub fn in_file(self, path: impl Into<String>) -> Self {
        Error::InFile { path: path.into(), source: Box::new(self) }
    }

    /// The error with any file context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::InFile { source, .. } => source.root(),
            other => other,
        }
    }
}
