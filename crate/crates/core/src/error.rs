use std::io;

use thiserror::Error;

/// Errors produced by fringelab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("value outside domain: {0}")]
    Domain(String),

    #[error("relative phase undefined: {0}")]
    UndefinedPhase(String),

    #[error("singular branch: {0}")]
    SingularBranch(String),

    #[error("operation requires {expected} sources, got {found}")]
    MethodMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("pixel budget exceeded: {requested} pixels requested, budget is {budget}")]
    Resource { requested: usize, budget: usize },

    #[error("range error: {0}")]
    Range(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("no contour crossing within {z_max:.4e} m along the {diagonal} diagonal")]
    WindowTooSmall { diagonal: &'static str, z_max: f64 },

    #[error("centre intensity {center:.6} does not exceed contour level {level:.6}")]
    DegenerateContour { center: f64, level: f64 },

    #[error("ratio/K relation is not monotone near k = {0}")]
    NotMonotone(f64),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("metadata error: {0}")]
    Metadata(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
