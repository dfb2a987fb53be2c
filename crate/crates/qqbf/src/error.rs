use thiserror::Error;

use crate::sim::VerifyReport;

pub type Result<T> = std::result::Result<T, QqbfError>;

#[derive(Debug, Error)]
pub enum QqbfError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("not coprime: {0}")]
    NotCoprime(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("incompatible pair: {0}")]
    Incompatible(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("verification failed at {} point(s)", .0.failures.len())]
    Verification(Box<VerifyReport>),
}

impl QqbfError {
    /// Short machine-readable tag used in JSON error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            QqbfError::Domain(_) => "domain",
            QqbfError::Dimension { .. } => "dimension",
            QqbfError::NotCoprime(_) => "not_coprime",
            QqbfError::Capacity(_) => "capacity",
            QqbfError::Incompatible(_) => "incompatible",
            QqbfError::Numeric(_) => "numeric",
            QqbfError::Unsupported(_) => "unsupported",
            QqbfError::Parse(_) => "parse",
            QqbfError::Verification(_) => "verification",
        }
    }

    /// Process exit code: 2 for bad input, 3 for infeasible requests,
    /// 4 for failed verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            QqbfError::Capacity(_) | QqbfError::Incompatible(_) | QqbfError::Numeric(_) => 3,
            QqbfError::Verification(_) => 4,
            _ => 2,
        }
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(QqbfError::Domain(msg.into()))
}
