use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("negative entry {value} at index {index} in {what}")]
    NegativeEntry {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("non-positive entry {value} at index {index} in {what}")]
    NonPositiveEntry {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("signal length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("Cholesky factorization failed: matrix is not positive definite")]
    Factorization,

    #[error("operator with n = {n} exceeds the dense materialization limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("GAMP diverged after damping retries (outer iteration {outer}, damping {damping})")]
    Diverged { outer: usize, damping: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            actual,
        });
    }
    Ok(())
}

pub(crate) fn check_nonneg(what: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(*v >= 0.0)) {
        Some(index) => Err(Error::NegativeEntry {
            what,
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

pub(crate) fn check_positive(what: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(*v > 0.0)) {
        Some(index) => Err(Error::NonPositiveEntry {
            what,
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}
