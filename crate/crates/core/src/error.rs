use thiserror::Error;

use crate::lattice::CellCoord;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid tiling: {0}")]
    InvalidTiling(String),
    #[error("region is not compatible with the requested brickwork: {0}")]
    IncompatibleRegion(String),
    #[error("cell {0} is on the region boundary; its stencil is incomplete")]
    PartialStencil(CellCoord),
    #[error("cell {0} is not matched")]
    Unmatched(CellCoord),
    #[error("operation requires a torus region")]
    NotTorus,
    #[error("mean current {0} is outside the octahedron or not admissible here")]
    BadMeanCurrent(String),
    #[error("flux mismatch across the gluing plane: {left} vs {right} per period")]
    FluxMismatch { left: String, right: String },
    #[error("inconsistent boundary constraints at {0}")]
    InconsistentConstraints(CellCoord),
    #[error("no tiling found for gap up to {0}")]
    GapExhausted(i64),
    #[error("enumeration budget exceeded ({0})")]
    BudgetExceeded(String),
    #[error("untileable region")]
    Untileable,
    #[error("divergence violation across face at {0}")]
    Divergence(CellCoord),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("precision overflow: {0}")]
    PrecisionOverflow(String),
    #[error("malformed surface: {0}")]
    MalformedSurface(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
