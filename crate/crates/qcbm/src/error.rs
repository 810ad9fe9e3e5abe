//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("qubit count must be at least 1")]
    NoQubits,

    #[error("parameter vector has length {got}, ansatz expects {expected}")]
    ParameterCount { expected: usize, got: usize },

    #[error("parameter index {index} out of range for {count} parameters")]
    ParameterIndex { index: usize, count: usize },

    #[error("probability table has length {got}, expected {expected}")]
    TableLength { expected: usize, got: usize },

    #[error("probability {value} at outcome {index} is not a number in [0, 1]")]
    InvalidProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, which is not 1 within {tolerance}")]
    NotNormalised { sum: f64, tolerance: f64 },

    #[error("outcome {outcome} out of range for a {n_bits}-bit distribution")]
    OutcomeOutOfRange { outcome: usize, n_bits: usize },

    #[error("window [{start}, {start}+{width}) does not fit in {n_bits} bits")]
    WindowOutOfRange {
        start: usize,
        width: usize,
        n_bits: usize,
    },

    #[error("window width must be at least 1")]
    EmptyWindow,

    #[error("empty sample set")]
    EmptySamples,

    #[error("standard deviation must be positive and finite, got {0}")]
    InvalidStd(f64),

    #[error("distributions have mismatched widths: {left} vs {right} bits")]
    WidthMismatch { left: usize, right: usize },

    #[error("{divergence} is singular where {vanishing} vanishes (outcome {outcome})")]
    SupportViolation {
        divergence: &'static str,
        vanishing: &'static str,
        outcome: usize,
    },

    #[error("ratio argument must be positive and finite, got {0}")]
    InvalidRatio(f64),

    #[error("ratio clamp bounds must satisfy 0 < r_min <= r_max, got [{r_min}, {r_max}]")]
    InvalidClampBounds { r_min: f64, r_max: f64 },

    #[error("exact ratio overflows: target mass is zero on outcome {outcome} with model mass {model_mass}")]
    RatioOverflow { outcome: usize, model_mass: f64 },

    #[error("unknown divergence name {0:?}")]
    UnknownDivergence(String),

    #[error("generator set must not be empty")]
    EmptyGeneratorSet,

    #[error("single-generator training expects exactly one generator, got {0}")]
    NotSingleGenerator(usize),

    #[error("window width {k} out of range for {n_bits} qubits")]
    WindowWidthOutOfRange { k: usize, n_bits: usize },

    #[error("shot count must be at least 1")]
    NoShots,

    #[error("learning rate must be finite, got {0}")]
    InvalidLearningRate(f64),

    #[error("need at least 2 records to bootstrap, got {0}")]
    TooFewRecords(usize),

    #[error("records have mismatched epoch counts")]
    RaggedRecords,

    #[error("distribution support must not be empty")]
    EmptySupport,

    #[error("distributions have mismatched support sizes: {left} vs {right}")]
    SupportMismatch { left: usize, right: usize },

    #[error("estimation distribution amplitude must lie in [0, 1], got {0}")]
    InvalidAmplitude(f64),

    #[error("query count must be a power of two at least 2, got {0}")]
    InvalidQueryCount(usize),

    #[error("target accuracy must lie in (0, 1), got {0}")]
    InvalidAccuracy(f64),

    #[error("ratio bound must be finite and at least 1, got {0}")]
    InvalidBound(f64),

    #[error("could not construct a concentrated test pair after {attempts} attempts")]
    PairConstruction { attempts: usize },

    #[error("ratio bound violated at index {index}: ratio {ratio} exceeds {bound}")]
    RatioBoundViolation {
        index: usize,
        ratio: f64,
        bound: f64,
    },

    #[error("ratio bound is infinite: denominator vanishes at index {index} with numerator mass {numerator}")]
    UnboundedRatio { index: usize, numerator: f64 },

    #[error("estimator expects a pair bounded in the {expected} direction")]
    WrongRatioOrientation { expected: &'static str },

    #[error("classifier serialisation failed: {0}")]
    Serialisation(String),
}
