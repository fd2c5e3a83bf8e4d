use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must share a dimension do not.
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    /// A vector argument has the wrong length.
    LengthMismatch {
        expected: usize,
        found: usize,
    },
    /// Permutations need at least two objects.
    DimensionTooSmall(usize),
    /// The mapping is not a bijection on `0..d`.
    NotABijection,
    /// Text could not be read as a permutation.
    ParsePermutation(String),
    /// Exhaustive enumeration was requested above the supported size.
    TooLargeForEnumeration {
        d: usize,
        max: usize,
    },
    InvalidHyperparameter(&'static str),
    InvalidConfig(&'static str),
    EmptyInput,
    /// Cholesky failed even after the jitter was escalated to its cap.
    NotPositiveDefinite,
    /// The kernel has no finite feature map (Mallows).
    NoFiniteFeatureMap,
    /// The black-box objective failed; `iteration` is the 0-based evaluation index.
    Objective {
        iteration: usize,
        message: String,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::DimensionTooSmall(d) => write!(f, "permutation dimension {d} is below 2"),
            Error::NotABijection => write!(f, "mapping is not a bijection on 0..d"),
            Error::ParsePermutation(s) => write!(f, "cannot parse permutation: {s}"),
            Error::TooLargeForEnumeration { d, max } => {
                write!(f, "exhaustive enumeration supports d <= {max}, got {d}")
            }
            Error::InvalidHyperparameter(what) => write!(f, "invalid hyperparameter: {what}"),
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::EmptyInput => write!(f, "empty input"),
            Error::NotPositiveDefinite => {
                write!(f, "matrix is not positive definite after jitter escalation")
            }
            Error::NoFiniteFeatureMap => {
                write!(f, "kernel has no finite feature map: the Mallows feature space is exponentially large")
            }
            Error::Objective { iteration, message } => {
                write!(f, "objective failed at evaluation {iteration}: {message}")
            }
        }
    }
}

impl core::error::Error for Error {}
