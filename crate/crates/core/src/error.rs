use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Most variants are precondition violations caused by the caller's data.
/// [`Error::is_internal`] singles out the ones that indicate a broken
/// invariant inside the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{a} is not a unit modulo {q}")]
    NotCoprime { a: String, q: u64 },

    #[error("p = {p} does not divide {q}^{f} - 1")]
    NotDivisible { q: u64, f: u64, p: u64 },

    #[error("p = {p} is outside the supported range (bound {bound})")]
    OutOfRange { p: u64, bound: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ring mismatch: {0}")]
    RingMismatch(String),

    #[error("Galois index k = {k} is divisible by p = {p}")]
    ZeroUnitIndex { k: i64, p: u64 },

    #[error("division by zero in the residue field")]
    DivideByZero,

    #[error("no element of order {p} in F_{q}^{f}")]
    NoRoot { q: u64, f: usize, p: u64 },

    #[error("pinned zeta does not equal xi^{pin}")]
    PinMismatch { pin: u64 },

    #[error("factor {index} of the radical word vanishes at the prime")]
    ZeroFactor { index: usize },

    #[error("q = {q} divides p*u*v")]
    DividesPuv { q: u64 },

    #[error("n = {n} is not admissible for q = {q}: {reason}")]
    BadN { n: u64, q: u64, reason: String },

    #[error("internal fault: value^kappa is not a p-th root of unity")]
    NotInMuP,

    #[error("radical family is empty: {0}")]
    EmptyFamily(String),

    #[error("m = {m} is divisible by p = {p}")]
    BadM { m: i64, p: u64 },

    #[error("q = {q} does not divide {expected}")]
    WrongDivisor { q: u64, expected: String },

    #[error("policy misuse: {0}")]
    PolicyMisuse(String),

    #[error("policy table line {line}: {message}")]
    PolicyFile { line: usize, message: String },

    #[error("the prime set S is empty")]
    BadS,

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("parse error at byte {offset}: expected one of [{}], found {found}", expected.join(", "))]
    Parse {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },

    #[error("semantic error at byte {offset}: {message}")]
    Semantic { offset: usize, message: String },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for faults that can only come from a bug, never from input data.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::NotInMuP | Error::Internal(_))
    }
}
