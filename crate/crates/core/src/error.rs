use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("sigma must exceed -1 (got {0})")]
    InvalidSigma(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("region outside grid: {0}")]
    OutsideGrid(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("denominator margin violated: min of 1 + d_n u is {0:.3e}")]
    MarginViolated(f64),
    #[error("contraction failure: {0}")]
    Contraction(String),
    #[error("monotonicity violated: {0}")]
    Monotonicity(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
