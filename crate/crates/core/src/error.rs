use thiserror::Error;

/// Everything that can go wrong while sampling, compiling or simulating.
#[derive(Debug, Error)]
pub enum FslError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("input is not unit-norm (norm² = {0})")]
    NonUnitNorm(f64),

    #[error("truncation window holds no spectral mass")]
    EmptyWindow,

    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("length {0} is not a power of two")]
    NonPowerOfTwoLength(usize),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("circuit still contains an opaque unitary; decompose it first")]
    OpaqueGatePresent,

    #[error("unknown function '{0}'")]
    UnknownFunction(String),

    #[error("negative value {value} under square root at grid index {index}")]
    NegativeUnderSqrt { index: usize, value: f64 },

    #[error("window 2^m equals the Nyquist index; integral bound degenerates")]
    DegenerateWindow,

    #[error("need at least 3 usable points for a slope fit, got {0}")]
    InsufficientPoints(usize),

    #[error("{requested} qubits exceed the simulator capacity of {capacity}")]
    CapacityExceeded { requested: usize, capacity: usize },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FslError {
    /// Stable machine-readable tag, used in CLI error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            FslError::DimensionMismatch { .. } => "DimensionMismatch",
            FslError::NonUnitNorm(_) => "NonUnitNorm",
            FslError::EmptyWindow => "EmptyWindow",
            FslError::NotADistribution(_) => "NotADistribution",
            FslError::NonPowerOfTwoLength(_) => "NonPowerOfTwoLength",
            FslError::NotUnitary(_) => "NotUnitary",
            FslError::OpaqueGatePresent => "OpaqueGatePresent",
            FslError::UnknownFunction(_) => "UnknownFunction",
            FslError::NegativeUnderSqrt { .. } => "NegativeUnderSqrt",
            FslError::DegenerateWindow => "DegenerateWindow",
            FslError::InsufficientPoints(_) => "InsufficientPoints",
            FslError::CapacityExceeded { .. } => "CapacityExceeded",
            FslError::InvalidPlan(_) => "InvalidPlan",
            FslError::InvalidGate(_) => "InvalidGate",
            FslError::InvalidArgument(_) => "InvalidArgument",
            FslError::Parse(_) => "Parse",
            FslError::Io(_) => "Io",
            FslError::Json(_) => "Json",
        }
    }
}

pub type Result<T> = std::result::Result<T, FslError>;
