//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0}: only 2 and 3 are supported")]
    UnsupportedDimension(usize),

    #[error("coincident points: separation {r:.3e} is below the {r_min:.0e} guard")]
    CoincidentPoints { r: f64, r_min: f64 },

    #[error("normal vector is not unit length (|n| = {norm})")]
    NonUnitNormal { norm: f64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("boundary sample count {got} is too small (need at least {min})")]
    CountTooSmall { got: usize, min: usize },

    #[error("negative enlargement epsilon {0}")]
    NegativeEpsilon(f64),

    #[error("point {0:?} is outside the computational domain")]
    PointOutsideDomain(Vec<f64>),

    #[error("point {0:?} does not lie on the domain boundary")]
    NotOnBoundary(Vec<f64>),

    #[error("evaluation point {point:?} is within {dist:.3e} of an integration point; the quadrature is unreliable there")]
    TooCloseToSample { point: Vec<f64>, dist: f64 },

    #[error("evaluation point coincides with a point source at {0:?}")]
    EvaluationAtSource(Vec<f64>),

    #[error("grid error: {0}")]
    InvalidGrid(String),

    #[error("grid shape mismatch: {a:?} vs {b:?}")]
    GridShapeMismatch { a: (usize, usize), b: (usize, usize) },

    #[error("all grid nodes are masked")]
    AllMasked,

    #[error("spacing {spacing} does not divide the side length {side} evenly")]
    NonConformingSpacing { spacing: f64, side: f64 },

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("non-finite gradient encountered at iteration {iteration} (parameter {index})")]
    NonFiniteGradient { iteration: usize, index: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("input data error: {0}")]
    InputData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
