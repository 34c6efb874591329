use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the core routines.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// A configured size or bound was exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// An intermediate value would not fit the configured integer width.
    #[error("integer overflow: {0}")]
    Overflow(String),
    /// A query outside the range a table was built for.
    #[error("{what} = {value} outside [{lo}, {hi})")]
    OutOfRange { what: &'static str, value: u64, lo: u64, hi: u64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    /// p^k divides every value of f.
    #[error("fixed k-th power divisor: {prime}^{k} divides f(n) for every n")]
    FixedPowerDivisor { prime: u128, k: u32 },
    /// Res(f, f') = 0.
    #[error("f has a repeated factor (Res(f, f') = 0)")]
    RepeatedFactor,
    #[error("factorization failed for n in {0:?}")]
    Factorization(Vec<u64>),
    /// An exact re-check of a computed quantity failed.
    #[error("certification failed: {0}")]
    Certification(String),
}

pub type Result<T> = core::result::Result<T, Error>;
