use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lattice scan of {points:e} points exceeds the guard of {limit:e}")]
    ScanTooLarge { points: f64, limit: f64 },

    #[error("gcd of {0:?} is not 1")]
    NotCoprime(Vec<i64>),

    #[error("integer matrix has determinant {0}, expected 1")]
    NotUnimodular(i128),

    #[error("point has |Im z_{index}| = {im} beyond strip radius {rho}")]
    OutsideStrip { index: usize, im: f64, rho: f64 },

    #[error("off-diagonal coefficient a vanishes identically")]
    IdenticallySingular,

    #[error("determinant {det:e} below floor {floor:e}")]
    Singular { det: f64, floor: f64 },

    #[error("every quadrature node underflowed or was singular")]
    AllSamplesSingular,

    #[error("matrix {index} has |det - 1| = {deviation:e}")]
    NotUnimodularChain { index: usize, deviation: f64 },

    #[error("chain of length {0} is too short (need n >= 3)")]
    ChainTooShort(usize),

    #[error("{n0} does not divide {n1}")]
    NotDivisible { n0: u64, n1: u64 },

    #[error("function vanishes identically")]
    IdenticallyZero,

    #[error("gate failed: {0}")]
    GateFailed(String),

    #[error("delta {delta} exceeds scanned minimum {scanned}")]
    InconsistentDelta { delta: f64, scanned: f64 },

    #[error("precondition {0} violated")]
    PreconditionFailed(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable variant name for machine-readable error records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ScanTooLarge { .. } => "ScanTooLarge",
            Error::NotCoprime(_) => "NotCoprime",
            Error::NotUnimodular(_) => "NotUnimodular",
            Error::OutsideStrip { .. } => "OutsideStrip",
            Error::IdenticallySingular => "IdenticallySingular",
            Error::Singular { .. } => "Singular",
            Error::AllSamplesSingular => "AllSamplesSingular",
            Error::NotUnimodularChain { .. } => "NotUnimodularChain",
            Error::ChainTooShort(_) => "ChainTooShort",
            Error::NotDivisible { .. } => "NotDivisible",
            Error::IdenticallyZero => "IdenticallyZero",
            Error::GateFailed(_) => "GateFailed",
            Error::InconsistentDelta { .. } => "InconsistentDelta",
            Error::PreconditionFailed(_) => "PreconditionFailed",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
