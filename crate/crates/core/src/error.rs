use thiserror::Error;

/// Errors raised by every module of the crate.
///
/// Each variant belongs to one [`ErrorKind`], which the command-line front end
/// maps onto its exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: String },

    #[error("line {line}: edge weight must be positive, got {weight}")]
    NonPositiveWeight { line: usize, weight: f64 },

    #[error("line {line}: edge ({tail}, {head}) repeated with conflicting weights {first} and {second}")]
    ConflictingDuplicate {
        line: usize,
        tail: String,
        head: String,
        first: f64,
        second: f64,
    },

    #[error("{module}: {message}")]
    InvalidInput {
        module: &'static str,
        message: String,
    },

    #[error("{module}: {message}")]
    Numeric {
        module: &'static str,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification of an [`Error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Io,
    Numeric,
}

impl Error {
    pub fn invalid(module: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidInput {
            module,
            message: message.into(),
        }
    }

    pub fn numeric(module: &'static str, message: impl Into<String>) -> Self {
        Error::Numeric {
            module,
            message: message.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io(_) => ErrorKind::Io,
            Error::Numeric { .. } => ErrorKind::Numeric,
            _ => ErrorKind::Validation,
        }
    }

    /// Name of the module the error originated in.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Parse { .. } | Error::Io(_) => "io",
            Error::SelfLoop { .. }
            | Error::NonPositiveWeight { .. }
            | Error::ConflictingDuplicate { .. } => "graph",
            Error::InvalidInput { module, .. } | Error::Numeric { module, .. } => module,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
