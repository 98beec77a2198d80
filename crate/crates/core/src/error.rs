use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),

    #[error("coefficient {field} leaves its envelope at r = {r} ({bound})")]
    EnvelopeViolation {
        field: char,
        r: f64,
        bound: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exponent window: {0}")]
    Window(String),

    #[error("non-finite value at node {node} (r = {r}) at t = {t}")]
    Instability { node: usize, r: f64, t: f64 },

    #[error("time derivative of order {requested} requested but the source only supplies up to {available}")]
    MissingDerivative { requested: usize, available: usize },

    #[error("grid mismatch: expected {expected} nodes, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("need at least {needed} samples to fit, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("non-positive values at t = {0:?}")]
    NonPositive(Vec<f64>),

    #[error("weight verification failed: {0}")]
    WeightFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
