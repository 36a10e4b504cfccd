use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value that cannot represent an element of the target space
    /// (zero quaternion, non-unit sphere point, ...).
    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Point sets or families that cannot be combined.
    #[error("composition error: {0}")]
    Composition(String),

    /// An exact oracle refused to run because the enumeration would exceed
    /// its budget.
    #[error("exact evaluation refused: {what} exceeds budget ({limit}); {hint}")]
    Budget {
        what: String,
        limit: String,
        hint: String,
    },

    #[error("backend failure: {0}")]
    Backend(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub(crate) fn non_empty(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("point set is empty"));
    }
    Ok(())
}
