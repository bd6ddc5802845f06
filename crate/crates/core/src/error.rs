use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input must be nonzero")]
    Zero,
    #[error("modulus {0} must be odd")]
    EvenModulus(u64),
    #[error("{0} must be prime")]
    NotPrime(u64),
    #[error("{x} has no inverse modulo {m}")]
    NoInverse { x: i64, m: u64 },
    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u64, u64),
    #[error("{value} exceeds the supported limit {limit}")]
    TooLarge { value: u64, limit: u64 },
    #[error("estimated {ops} operations exceeds the guard of {limit}; shrink the instance")]
    Oversize { ops: u128, limit: u128 },
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
