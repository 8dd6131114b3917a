use core::fmt;

/// Errors surfaced by the math and watermarking primitives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Family or Sobolev parameters outside their documented domain.
    InvalidParams(&'static str),
    /// A closed-form coefficient path was evaluated at one of its poles.
    SingularPoint(&'static str),
    /// An evaluation produced NaN or infinity.
    NonFinite(&'static str),
    /// A basis entry came out non-finite during construction.
    Construction { degree: usize, point: usize },
    /// Matrix/vector/bit-sequence sizes do not line up.
    DimensionMismatch { expected: usize, got: usize },
    /// Scalar argument outside its documented interval.
    Domain(&'static str),
    /// The chaotic key failed to produce a full permutation within budget.
    DegenerateKey,
    /// Image has too few blocks for the requested payload.
    Capacity { needed: usize, available: usize },
    /// Image dimensions are not divisible by the block size.
    BlockAlignment { width: usize, height: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(what) => write!(f, "invalid parameters: {what}"),
            Error::SingularPoint(what) => write!(f, "singular point: {what}"),
            Error::NonFinite(what) => write!(f, "non-finite evaluation: {what}"),
            Error::Construction { degree, point } => write!(
                f,
                "non-finite basis entry at degree {degree}, point {point}"
            ),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::DegenerateKey => write!(
                f,
                "degenerate chaos key: permutation budget exhausted before covering all indices"
            ),
            Error::Capacity { needed, available } => write!(
                f,
                "size error: payload needs {needed} blocks but the image provides {available}"
            ),
            Error::BlockAlignment { width, height } => write!(
                f,
                "size error: image {width}x{height} is not divisible into 8x8 blocks"
            ),
        }
    }
}

impl core::error::Error for Error {}
