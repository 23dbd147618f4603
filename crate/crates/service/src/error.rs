use deepie_core::{EvolutionError, GeneratorError};

use crate::session::SessionStatus;

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("{0}")]
    Validation(String),
    #[error("stale request: expected generation {expected}, session is at generation {actual}")]
    StaleGeneration { expected: u64, actual: u64 },
    #[error("stale request: expected status {expected:?}, session is {actual:?}")]
    StaleStatus { expected: SessionStatus, actual: SessionStatus },
    #[error("session is {actual:?}; operation requires {required:?}")]
    WrongStatus { required: SessionStatus, actual: SessionStatus },
    #[error("review position {position} is out of range for {len} entries")]
    InvalidPosition { position: usize, len: usize },
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("log I/O: {0}")]
    Io(#[from] std::io::Error),
}

impl SessionError {
    /// Stable machine-readable code used in HTTP error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::UnknownModel(_) | SessionError::UnknownSession(_) => "not_found",
            SessionError::Validation(_) | SessionError::InvalidPosition { .. } => "validation",
            SessionError::Evolution(_) => "validation",
            SessionError::StaleGeneration { .. } | SessionError::StaleStatus { .. } => "conflict",
            SessionError::WrongStatus { .. } => "session_state",
            SessionError::Generator(_) | SessionError::Io(_) => "internal",
        }
    }
}

/// Failure to rebuild a session from its log.
#[derive(Debug, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct RestoreError {
    /// 1-based line number in the log stream.
    pub line: usize,
    pub reason: String,
}
