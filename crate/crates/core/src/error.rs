use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are grouped by how a caller should react: input validation,
/// resource limits, and numerical failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid order: {0}")]
    InvalidOrder(String),
    #[error("q matrix is not Hermitian: |q[{i}][{j}] - conj(q[{j}][{i}])| = {gap:e}")]
    NonHermitian { i: usize, j: usize, gap: f64 },
    #[error("|q[{i}][{j}]| = {modulus} exceeds 1")]
    QOutOfBounds { i: usize, j: usize, modulus: f64 },
    #[error("invalid preset arguments: {0}")]
    InvalidArgs(String),
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("site index {site} out of range (site_count = {site_count})")]
    SiteOutOfRange { site: usize, site_count: usize },
    #[error("green index {green} out of range 1..={order}")]
    GreenOutOfRange { green: usize, order: usize },
    #[error("permutation degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("not a permutation: {0:?}")]
    NotAPermutation(Vec<usize>),
    #[error("closed form requires pairwise distinct base indices; use the oracle path")]
    RepeatedIndices,
    #[error("word parse error: {0}")]
    Parse(String),
    #[error("mixed A/B letters in a word; expand A letters first")]
    MixedWord,
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("matrix is not Hermitian within {tol:e} (gap {gap:e})")]
    NotHermitianMatrix { gap: f64, tol: f64 },
    #[error("eigen-solver did not converge")]
    NoConvergence,
    #[error("singular system: {0}")]
    Singular(String),
    #[error("vanishing denominator in closed-form coefficient (p = {p}, |q| = {modulus})")]
    VanishingDenominator { p: usize, modulus: f64 },
    #[error("residual {residual:e} above threshold {threshold:e}")]
    ResidualTooLarge { residual: f64, threshold: f64 },
    #[error("format error: {0}")]
    Format(String),
    #[error("{0}")]
    Precondition(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ResourceLimit(_) => 3,
            Error::NoConvergence | Error::Singular(_) | Error::ResidualTooLarge { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
