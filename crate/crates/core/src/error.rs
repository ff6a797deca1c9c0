use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("q = {0} has bad reduction (gcd(q, 30) > 1)")]
    BadReduction(u64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate lattice: {0}")]
    DegenerateLattice(String),
    #[error("ambiguous Lefschetz multiplier at q = {q}: candidates {candidates:?}")]
    AmbiguousK { q: u64, candidates: Vec<i64> },
    #[error("no Lefschetz multiplier fits the Weil bound at q = {0}")]
    NoK(u64),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("cache corrupted at {path}, row {row}: {reason}")]
    CacheCorrupt { path: String, row: usize, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
    #[error("missing Frobenius traces; point counts needed for q in {0:?}")]
    MissingTraces(Vec<u64>),
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("quadrature did not converge (achieved error estimate {achieved:e})")]
    Quadrature { achieved: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
