use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline error. Every variant maps onto one of the scriptable exit
/// codes via [`Error::exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    Encoding { path: PathBuf, offset: usize },

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("network error: {0}")]
    Network(String),

    #[error("fixture miss: no recorded response for request hash {hash}")]
    FixtureMiss { hash: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse error class carried over the wire between service and client.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Input,
    Encoding,
    Parse,
    Network,
    FixtureMiss,
    Contract,
    Io,
}

impl ErrorKind {
    /// Exit codes: 0 success, 2 input error, 3 network error, 4 fixture
    /// miss, 5 contract violation.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Input | ErrorKind::Encoding | ErrorKind::Parse | ErrorKind::Io => 2,
            ErrorKind::Network => 3,
            ErrorKind::FixtureMiss => 4,
            ErrorKind::Contract => 5,
        }
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Input(_) => ErrorKind::Input,
            Error::Encoding { .. } => ErrorKind::Encoding,
            Error::Parse { .. } => ErrorKind::Parse,
            Error::Network(_) => ErrorKind::Network,
            Error::FixtureMiss { .. } => ErrorKind::FixtureMiss,
            Error::Contract(_) => ErrorKind::Contract,
            Error::Io { .. } => ErrorKind::Io,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind().exit_code()
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

/// Reconstruct a typed error from its wire form (kind + message). Used by
/// the HTTP client so callers see the same error classes as library users.
pub fn from_wire(kind: ErrorKind, message: String) -> Error {
    match kind {
        ErrorKind::Input => Error::Input(message),
        ErrorKind::Encoding => Error::Input(message),
        ErrorKind::Parse => Error::Parse { position: 0, message },
        ErrorKind::Network => Error::Network(message),
        ErrorKind::FixtureMiss => Error::FixtureMiss { hash: message },
        ErrorKind::Contract => Error::Contract(message),
        ErrorKind::Io => Error::Input(message),
    }
}
