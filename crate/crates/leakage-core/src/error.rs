use crate::simplex::LpStatus;
use crate::system::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("alphabet must have at least one symbol")]
    EmptyAlphabet,

    #[error("probability out of range: {value}")]
    NonPositiveProbability { value: f64 },

    #[error("distribution does not sum to 1 (sum = {sum})")]
    NotNormalized { sum: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("unknown axis index {index}")]
    UnknownAxis { index: usize },

    #[error("axis or source sets overlap but must be disjoint")]
    OverlappingAxes,

    #[error("conditional is undefined: the conditioning event has zero probability")]
    UndefinedConditional,

    #[error("mechanism alphabet mismatch: expected {expected} rows, got {actual}")]
    AlphabetMismatch { expected: usize, actual: usize },

    #[error("invalid mechanism: {0}")]
    InvalidMechanism(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("system too large: {vertices} realizations exceed the cap of {cap}")]
    SystemTooLarge { vertices: usize, cap: usize },

    #[error("precondition: perfect decoding must hold for every user")]
    PerfectDecodingRequired,

    #[error("linear program did not reach an optimum: {0:?}")]
    LpNotOptimal(LpStatus),

    #[error("digraph catalog too large for n = {n} vertices (max 5)")]
    CatalogTooLarge { n: usize },

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "soundness violation in trial {trial}: achieved leakage {achieved_bits} bits \
         fell below the lower bound {bound_bits} bits"
    )]
    SoundnessViolation {
        trial: usize,
        achieved_bits: f64,
        bound_bits: f64,
    },

    #[error("system fails validation: {0:?}")]
    InvalidSystem(Vec<Violation>),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
