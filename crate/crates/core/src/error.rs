use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPd { min_eigenvalue: f64 },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("multivariate gamma argument out of domain at index {index}: a - (i-1)beta/2 = {value}")]
    DomainError { index: usize, value: f64 },
    #[error("requested degree {requested} exceeds the hard cap {cap}")]
    TruncationCapExceeded { requested: usize, cap: usize },
    #[error("lower parameter b[{index}] = {value} makes a Pochhammer factor vanish")]
    BadLowerParameter { index: usize, value: f64 },
    #[error("argument lies outside the support: {0}")]
    OutsideSupport(String),
    #[error("all probability expressions diverged")]
    AllDiverged(Vec<String>),
    #[error("hypothesis is not estimable: C (X'X)^- C' is singular")]
    NotEstimable,
    #[error("degenerate design: nu_E + nu_H - m = {0}")]
    DegenerateDesign(i64),
}

pub type Result<T> = std::result::Result<T, Error>;
