use thiserror::Error;

/// Errors raised by the numerical operators and the verification harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("interval [{a}, {b}] exceeds the grid domain [{lo}, {hi}]")]
    IntervalOutOfDomain { a: f64, b: f64, lo: f64, hi: f64 },

    #[error("degenerate interval [{a}, {b}]")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("evaluator returned a non-finite value at h = {h}")]
    NonFiniteEvaluation { h: f64 },

    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },

    #[error("weight is not strictly positive (value {value} at x = {x})")]
    NonPositiveWeight { x: f64, value: f64 },

    #[error("empty family: {0}")]
    EmptyFamily(&'static str),

    #[error("exponent p = {p} does not match class {class}")]
    ExponentMismatch { p: f64, class: String },

    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("point {x} (window {needed}) lies outside the domain [{lo}, {hi}]")]
    PointOutOfDomain { x: f64, needed: String, lo: f64, hi: f64 },

    #[error("kernel has not been validated")]
    UnvalidatedKernel,

    #[error("hypothesis failure: {0}")]
    HypothesisFailure(String),

    #[error("parse error at position {pos}: {msg}")]
    ParseError { pos: usize, msg: String },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
