use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cube dimension {0} outside supported range 1..={max}", max = crate::cube_index::MAX_DIM)]
    DimensionOutOfRange(usize),

    #[error("vertex bits {bits:#b} do not fit in dimension {dim}")]
    VertexOutOfRange { dim: usize, bits: u32 },

    #[error("index {index} out of range {lo}..={hi}")]
    IndexOutOfRange { index: i64, lo: i64, hi: i64 },

    #[error("invalid permutation of [{0}]")]
    InvalidPermutation(usize),

    #[error("matrix size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("matrix size {0} unsupported (need {1})")]
    UnsupportedSize(usize, &'static str),

    #[error("exponent {exponent} exceeds the precision bound {bound} for size {size}")]
    PrecisionLimit { exponent: i64, bound: i64, size: usize },

    #[error("window [{lo}, {hi}] is outside the sequence range [{first}, {last}]")]
    WindowOutOfRange { lo: i64, hi: i64, first: i64, last: i64 },

    #[error("sequence window of {len} entries exceeds the budget of {budget}")]
    WindowTooLarge { len: u64, budget: u64 },

    #[error("modulus {n} exceeds the cap {cap}")]
    ModulusCap { n: usize, cap: usize },

    #[error("modulus {m} does not divide {n}")]
    NotAFactor { m: usize, n: usize },

    #[error("inconsistent cube faces: residual {0:e}")]
    InconsistentFaces(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
