use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("beta must be a finite real greater than 1, got {0}")]
    InvalidBeta(f64),

    #[error("threshold must be a finite positive real, got {0}")]
    InvalidThreshold(f64),

    #[error("sample count must be at least {min}, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("sample values must be finite")]
    NonFiniteSample,

    #[error("magnitudes must be finite and nonnegative with at least one positive entry")]
    DegenerateMagnitudes,

    #[error("enumeration over 2^{0} sign vectors exceeds the 2^{max} budget", max = crate::oracle::MAX_ENUMERATION_LEN)]
    EnumerationBudget(usize),

    #[error("threshold {x} is outside the interior (0, {endpoint}); use the closed form")]
    OutsideInterior { x: f64, endpoint: f64 },

    #[error("tolerance must be a finite positive real, got {0}")]
    InvalidTolerance(f64),

    #[error("optimizer did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
