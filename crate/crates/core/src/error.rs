use thiserror::Error;

/// Errors surfaced by the library. Lemma violations are report content, not errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("psi vanishes at t = {0}")]
    PsiZero(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
