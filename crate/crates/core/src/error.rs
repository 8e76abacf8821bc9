use thiserror::Error;

use crate::algebra::Shape;
use crate::spaces::{Flavor, Point};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: Shape, right: Shape },

    #[error("matrix is not self-adjoint (max asymmetry {asymmetry:e})")]
    NotSelfAdjoint { asymmetry: f64 },

    #[error("element is not positive (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("order tolerance must be finite and nonnegative, got {0}")]
    InvalidTolerance(f64),

    #[error("invalid contraction constants: {0}")]
    InvalidConstants(String),

    #[error("expected a {expected:?} distance, found {found:?}")]
    WrongFlavor { expected: Flavor, found: Flavor },

    #[error("sequence probe has no limit point")]
    MissingLimit,

    #[error("orbit left the domain at iteration {index}: {point}")]
    OrbitEscaped { index: usize, point: Point },

    #[error("non-finite value at iteration {index}")]
    NonFinite { index: usize },

    #[error("uniqueness probe needs at least two starts, got {0}")]
    TooFewStarts(usize),

    #[error("start {index}: {source}")]
    Start { index: usize, source: Box<Error> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },
}
