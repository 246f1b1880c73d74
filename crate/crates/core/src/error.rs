use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("values from different fields ({0} vs {1})")]
    FieldMismatch(String, String),

    #[error("cannot parse scalar {text:?}: {reason}")]
    ParseScalar { text: String, reason: String },

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("degree overflow: {left} + {right} exceeds ambient dimension {n}")]
    DegreeOverflow { left: usize, right: usize, n: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid index sets: {0}")]
    InvalidIndexSet(String),

    #[error("invalid relation triple: {0}")]
    InvalidTriple(String),

    #[error("quadratic form rank is undefined here in characteristic 2")]
    CharacteristicTwo,

    #[error("pullback identity failed for triple {0}")]
    PullbackMismatch(String),

    #[error("subspaces are too close: q = {0} < 2")]
    QTooSmall(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("input is decomposable")]
    Decomposable,

    #[error("bad prime {prime}: {reason}")]
    BadPrime { prime: u64, reason: String },

    #[error("scalar {0} has a denominator divisible by {1}")]
    DenominatorClash(String, u64),

    #[error("method {method} not applicable: {reason}")]
    MethodInapplicable { method: String, reason: String },

    #[error("methods disagree: {0}")]
    Consistency(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
