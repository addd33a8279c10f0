use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("pattern does not match word degree: {0}")]
    Pattern(String),
    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },
    #[error("not a row contraction (row norm {norm:.12})")]
    NotContraction { norm: f64 },
    #[error("representation is not defect free: {0}")]
    NotDefectFree(String),
    #[error("limit exceeded: {0}")]
    Limit(String),
    #[error("empty operator")]
    Empty,
    #[error("non-finite entry")]
    NonFinite,
    #[error("scalar is not unimodular: |z| = {0}")]
    NotUnimodular(f64),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
