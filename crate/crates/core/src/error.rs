use core::fmt;

/// Errors surfaced by the solver and oracle routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix or vector contained NaN or infinite entries.
    NonFinite,
    /// Two inputs that must be conformable were not.
    DimensionMismatch { expected: usize, found: usize },
    /// A matrix required to be positive definite was not.
    NotPositiveDefinite { min_eigenvalue: f64 },
    /// A configuration value violated its invariant.
    InvalidConfig(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite => f.write_str("input contains non-finite entries"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotPositiveDefinite { min_eigenvalue } => {
                write!(
                    f,
                    "matrix is not positive definite (min eigenvalue {min_eigenvalue:e})"
                )
            }
            Error::InvalidConfig(why) => write!(f, "invalid configuration: {why}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
