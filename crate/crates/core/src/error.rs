use thiserror::Error;

/// Errors produced by the weighted sparse approximation toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested projection or count needs integer squared weights (or a
    /// small enough problem for enumeration) and the inputs do not qualify.
    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// Exhaustive enumeration was refused because the instance is too large.
    #[error("refused: {0}")]
    Refused(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A theorem hypothesis was not met, so the corresponding bound is not claimed.
    #[error("precondition not satisfied: {0}")]
    Precondition(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what}: length {got}, expected {expected}"
        )))
    }
}
