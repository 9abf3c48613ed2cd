use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: evaluation at the logarithmic pole")]
    Pole,
    #[error("non-integrable: {0}")]
    NonIntegrable(String),
    #[error("finite-difference stencil straddles a zero of f near {0}")]
    StencilNearZero(String),
    #[error("f vanishes identically")]
    ZeroFunction,
    #[error("residual is not inner: {0}")]
    ResidualNotInner(String),
    #[error("logarithm branch cannot be continued: {0}")]
    Branch(String),
    #[error("critical value: |s'| = {0:e} at a boundary preimage")]
    CriticalValue(f64),
    #[error("unknown case: {0}")]
    UnknownCase(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
