//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors from sketch construction, hashing, coding, and stream generation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Target relative error outside `(0, 1]`.
    InvalidEpsilon(f64),
    /// Epsilon so small that `ceil(4/eps^2) + 1` exceeds the supported
    /// bucket-count maximum.
    EpsilonTooSmall(f64),
    /// Bucket count zero or above [`crate::hashing::MAX_BUCKET_COUNT`].
    InvalidBucketCount(u64),
    /// Baseline estimator count of zero.
    InvalidEstimatorCount,
    /// Element id not below the hash field order.
    ElementOutOfRange(u64),
    /// An update or merge would push `items_seen` past the `2^62` guard.
    TooManyItems,
    /// Merge between sketches that disagree on the named field.
    MergeMismatch { field: &'static str },
    /// Exhaustive enumeration larger than the guard allows.
    EnumerationTooLarge { assignments: u128, limit: u128 },
    /// Moment order above the supported maximum.
    MomentOrderTooLarge(u32),
    /// Moment sum exceeded 128-bit accumulation.
    MomentOverflow,
    /// Malformed encoded sketch; `bit` is the offset where decoding failed.
    Decode { bit: usize, reason: &'static str },
    /// Invalid stream-generator parameters.
    InvalidStreamParams(String),
    /// Multi-level stream parameters not of the required shape
    /// (`n` a power of four, `1/epsilon` a power of two, `epsilon > 4/sqrt(n)`);
    /// the nearest valid pair is suggested.
    InvalidMultilevelShape {
        n: u64,
        epsilon: f64,
        nearest_n: u64,
        nearest_epsilon: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidEpsilon(eps) => {
                write!(f, "epsilon {eps} outside (0, 1]")
            }
            Error::EpsilonTooSmall(eps) => {
                write!(
                    f,
                    "epsilon {eps} requires more than {} buckets",
                    crate::hashing::MAX_BUCKET_COUNT
                )
            }
            Error::InvalidBucketCount(p) => {
                write!(
                    f,
                    "bucket count {p} outside [1, {}]",
                    crate::hashing::MAX_BUCKET_COUNT
                )
            }
            Error::InvalidEstimatorCount => {
                write!(f, "estimator count must be at least 1")
            }
            Error::ElementOutOfRange(x) => {
                write!(
                    f,
                    "element {x} not below the field order {}",
                    crate::hashing::FIELD_ORDER
                )
            }
            Error::TooManyItems => {
                write!(f, "update count would exceed the 2^62 guard")
            }
            Error::MergeMismatch { field } => {
                write!(f, "merge mismatch: sketches differ in {field}")
            }
            Error::EnumerationTooLarge { assignments, limit } => {
                write!(
                    f,
                    "exhaustive enumeration of {assignments} assignments exceeds the guard of {limit}"
                )
            }
            Error::MomentOrderTooLarge(p) => {
                write!(
                    f,
                    "moment order {p} above the supported maximum {}",
                    crate::oracle::MAX_MOMENT_ORDER
                )
            }
            Error::MomentOverflow => {
                write!(f, "moment sum exceeded 128-bit accumulation")
            }
            Error::Decode { bit, reason } => {
                write!(f, "decode failed at bit {bit}: {reason}")
            }
            Error::InvalidStreamParams(msg) => {
                write!(f, "invalid stream parameters: {msg}")
            }
            Error::InvalidMultilevelShape {
                n,
                epsilon,
                nearest_n,
                nearest_epsilon,
            } => {
                write!(
                    f,
                    "multi-level parameters (n={n}, epsilon={epsilon}) invalid: n must be a \
                     power of four, 1/epsilon a power of two, and epsilon > 4/sqrt(n); \
                     nearest valid pair is (n={nearest_n}, epsilon={nearest_epsilon})"
                )
            }
        }
    }
}

impl core::error::Error for Error {}
