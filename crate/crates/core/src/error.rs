use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular matrix: {0}")]
    SingularMatrix(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("did not converge: {0}")]
    NotConverged(String),
    #[error("degenerate rescaling: {0}")]
    DegenerateRescaling(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
