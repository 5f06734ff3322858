use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point outside the dilation domain: distance {distance} exceeds radius {radius}")]
    OutOfDomain { distance: f64, radius: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid scale: {0}")]
    InvalidScale(String),

    #[error("chart inversion did not converge after {iterations} iterations")]
    NoInvert { iterations: usize },

    #[error("limit estimate did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid Lie algebra: {identity} violated at indices {indices:?}")]
    InvalidAlgebra { identity: String, indices: Vec<usize> },

    #[error("unsupported variant: {0}")]
    UnsupportedVariant(String),

    #[error("unsupported step {step}: constructive decomposition needs step <= 2")]
    UnsupportedStep { step: u32 },

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("all defects are below the noise floor")]
    NoiseFloor,

    #[error("not enough samples: {0}")]
    InsufficientSamples(String),

    #[error("map is not contractive: {0}")]
    NotContractive(String),

    #[error("missing reference tangent data: {0}")]
    MissingReference(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
