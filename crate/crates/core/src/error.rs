use thiserror::Error;

/// Errors produced by the constructions and analyses in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("gcd(0, 0) is undefined")]
    ZeroGcd,
    #[error("{0} is not prime")]
    NotPrime(i64),
    #[error("prime {0} appears more than once")]
    DuplicatePrime(i64),
    #[error("modulus {value} exceeds the supported maximum {max}")]
    ModulusTooLarge { value: i128, max: i64 },
    #[error("{what}: requested {requested} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        requested: u128,
        cap: u128,
    },
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("generating set does not span a full-rank lattice")]
    NotFullRank,
    #[error("word is not a codeword of level {level}")]
    NotACodeword { level: usize },
    #[error("invalid side-information subset: {0}")]
    InvalidSubset(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
