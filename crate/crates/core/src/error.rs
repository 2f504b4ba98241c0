use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("x has {x} values but y has {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("need at least 2 observations, got {0}")]
    TooFewPoints(usize),
    #[error("x must be strictly increasing (violated at index {index})")]
    NotIncreasing { index: usize },
    #[error("duplicate x value {value}")]
    DuplicateX { value: String },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("values at positions {first} and {second} are tied")]
    TiedValues { first: usize, second: usize },
    #[error("slope {slope} is a breakpoint: residuals tie there")]
    BreakpointHit { slope: f64 },
    #[error("{n} observations exceed the pairwise-slope guard of {max}")]
    TooManyPoints { n: usize, max: usize },
    #[error("breakpoint group does not form consecutive ranks; slopes are inconsistent at the tie tolerance")]
    InconsistentBreakpoints,
    #[error("critical value must lie in (0, 1], got {0}")]
    DegenerateLevel(f64),
    #[error("target level must lie in (0, 1), got {0}")]
    InvalidTargetLevel(f64),
    #[error("level {target} is unattainable for n = {n}; maximum attainable level is {max_attainable}")]
    LevelUnattainable { target: f64, n: usize, max_attainable: f64 },
    #[error("exact null enumeration for n = {n} exceeds the ceiling {ceiling}")]
    NullTooLarge { n: usize, ceiling: usize },
    #[error("replication count {got} is below the minimum {min}")]
    TooFewReplications { got: usize, min: usize },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("quadrature failed to reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    QuadratureFailure { tolerance: f64, estimate: f64 },
    #[error("C vanishes for this model and design; the asymptotic variance is undefined")]
    DegenerateDesign,
    #[error("model {0} has infinite variance")]
    InfiniteVariance(String),
    #[error("invalid distribution model: {0}")]
    InvalidModel(String),
    #[error("model {0} has no quantile function and cannot be sampled")]
    ModelNotSampleable(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}
