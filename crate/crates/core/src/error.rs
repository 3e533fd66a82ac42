use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("p = {0} is not an odd prime")]
    BadPrime(u64),
    #[error("p = {p} divides N = {n}")]
    PDividesN { p: u64, n: u64 },
    #[error("N must be positive")]
    BadModulus,
    #[error("precision M = {0} is below the minimum of 2")]
    PrecisionTooSmall(u32),
    #[error("p^M exceeds the supported residue width (p = {p}, M = {m})")]
    PrecisionTooLarge { p: u64, m: u32 },
    #[error("elements come from different contexts")]
    ContextMismatch,
    #[error("{0} is not a p-adic unit")]
    NotAUnit(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("seed is not a root mod p")]
    HenselBadSeed,
    #[error("seed is not a simple root (derivative is not a unit); use the Newton polygon instead")]
    HenselNonSimple,
    #[error("context for N' = {have} lacks roots of unity; build it for N' = {needed}")]
    MissingRootsOfUnity { have: u64, needed: u64 },
    #[error("character is not primitive (conductor {conductor}, modulus {modulus})")]
    NotPrimitive { conductor: u64, modulus: u64 },
    #[error("character is trivial")]
    TrivialCharacter,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("truncation too small: need K >= {required}, have {have}")]
    TruncationTooSmall { required: usize, have: usize },
    #[error("Mahler expansion did not converge within K = {k}: tail valuation {achieved}, wanted {wanted}")]
    NoConvergence { k: usize, achieved: i64, wanted: i64 },
    #[error("series diverges at term {0}")]
    Divergence(usize),
    #[error("independent computations disagree: {0}")]
    Disagreement(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
