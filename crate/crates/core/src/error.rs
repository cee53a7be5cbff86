use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (1 ≤ d ≤ 3)")]
    UnsupportedDimension(usize),
    #[error("degrees of freedom {dof} exceed budget {budget}")]
    TooLarge { dof: usize, budget: usize },
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("eigensolver did not converge: {0}")]
    NonConvergence(String),
    #[error("eigenvalue count mismatch: solver found {found}, inertia reports {inertia}")]
    CountMismatch { found: usize, inertia: usize },
    #[error("spectral parameter {z} lies within {tol} of the spectrum")]
    Resonant { z: f64, tol: f64 },
    #[error("basis not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
    #[error("window outside raster region")]
    WindowOutside,
    #[error("thickness can only be certified for periodic rasters; {0}")]
    NotPeriodic(&'static str),
    #[error("raster too coarse: {0}")]
    TooCoarse(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("box not covered by site registration region: {0}")]
    Coverage(String),
    #[error("missing claim: {0}")]
    MissingClaim(&'static str),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
