use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("energy {energy} is below the ground level E0 = {ground}")]
    BelowLadder { energy: f64, ground: f64 },

    #[error("level index {index} out of range (ladder has {len} levels, need 1 <= j < len)")]
    LevelIndex { index: usize, len: usize },

    /// A closed form under- or overflowed in double precision.
    #[error("numeric guard: {0}")]
    NumericGuard(String),

    #[error("field has no analytic partial derivatives")]
    MissingAnalyticPartials,
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {value}")))
    }
}
