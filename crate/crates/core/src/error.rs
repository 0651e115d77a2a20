use thiserror::Error;

/// Errors raised by the retrieval, approximation and reduction routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no polynomial of degree <= {max_degree} reaches relative error {target:e} on [-{interval_bound}, {interval_bound}] (best {best:e} at degree {max_degree})")]
    DegreeExhausted {
        interval_bound: f64,
        target: f64,
        max_degree: usize,
        best: f64,
    },

    #[error("invalid interval bound {0}: must be positive and finite")]
    InvalidBound(f64),

    #[error("invalid relative error target {0}: must lie in (0, 0.1)")]
    InvalidTolerance(f64),

    #[error("feature map rank {rank} exceeds cap {cap}")]
    SizeOverflow { rank: u128, cap: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("empty vector passed to {0}")]
    EmptyVector(&'static str),

    #[error("approximate normalizer entry {index} is {value:e} (<= 0); refit with a tighter delta_a")]
    NonPositiveNormalizer { index: usize, value: f64 },

    #[error("operation needs at least two stored patterns")]
    SingleMemory,

    #[error("pattern index {index} out of range for {count} patterns")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("invalid reduction parameters: {0}")]
    InvalidParams(String),

    #[error("enumeration cost {cost} exceeds cap {cap}")]
    CostCapExceeded { cost: u128, cap: u128 },

    #[error("cannot plant a pair at squared distance {k} in dimension {d} with balanced rows")]
    InfeasiblePlant { k: usize, d: usize },

    #[error("argument outside the function domain: {0}")]
    OutOfDomain(String),

    #[error("storage infeasible: sphere radius {radius} <= approximation error {delta_h}")]
    InfeasibleStorage { radius: f64, delta_h: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable variant name, used on the CLI diagnostic stream.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegreeExhausted { .. } => "DegreeExhausted",
            Error::InvalidBound(_) => "InvalidBound",
            Error::InvalidTolerance(_) => "InvalidTolerance",
            Error::SizeOverflow { .. } => "SizeOverflow",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::EmptyVector(_) => "EmptyVector",
            Error::NonPositiveNormalizer { .. } => "NonPositiveNormalizer",
            Error::SingleMemory => "SingleMemory",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::InvalidParams(_) => "InvalidParams",
            Error::CostCapExceeded { .. } => "CostCapExceeded",
            Error::InfeasiblePlant { .. } => "InfeasiblePlant",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::InfeasibleStorage { .. } => "InfeasibleStorage",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Format(_) => "Format",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
