use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("width {0} is outside 1..=64")]
    WidthOutOfRange(usize),
    #[error("value 0x{bits:x} does not fit in {width} bits")]
    ValueOverflow { width: usize, bits: u64 },
    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("conjugator is singular")]
    SingularConjugator,
    #[error("{what}: size {requested} exceeds the limit {limit}")]
    SizeTooLarge {
        what: &'static str,
        requested: u64,
        limit: u64,
    },
    #[error("predicate does not define a subgroup: {0}")]
    NotASubgroup(&'static str),
    #[error("dim(W) = {d} is out of range for n = {n} (need 1 <= d <= n - 2)")]
    DimensionOutOfRange { n: usize, d: usize },
    #[error("defining matrix is invalid: {0}")]
    InvalidSpec(String),
    #[error("block operations have different widths")]
    HeterogeneousWidths,
    #[error("wrong regime: {0}")]
    WrongRegime(String),
    #[error("s-box is not a permutation")]
    NotBijective,
    #[error("map is not affine with respect to the operation")]
    NotCircAffine,
    #[error("diffusion layer is not linear for the operation")]
    NotInHOmega,
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors raised by a size guard rather than by bad input.
    pub fn is_size_guard(&self) -> bool {
        matches!(self, Error::SizeTooLarge { .. })
    }
}
