use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum UtmError {
    #[error("invalid dispersion: {0}")]
    Dispersion(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("root finder did not converge at k = {0}")]
    Roots(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("config error at line {line}, column {column}: {msg}")]
    Config { line: usize, column: usize, msg: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("insufficient smoothness: {0}")]
    Smoothness(String),
}

impl UtmError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, UtmError::Roots(_) | UtmError::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, UtmError>;
