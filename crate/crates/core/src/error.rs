use thiserror::Error;

pub type Result<T> = std::result::Result<T, DickeError>;

#[derive(Debug, Error)]
pub enum DickeError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("operation requires the full Hilbert space but got the {0} parity sector")]
    SectorRestricted(&'static str),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("norm drift {drift:.3e} at t = {t:.6e} exceeds {limit:.1e}")]
    NormDrift { t: f64, drift: f64, limit: f64 },

    #[error("positivity violated at t = {t:.6e}: minimum eigenvalue {min_eig:.3e}")]
    Positivity { t: f64, min_eig: f64 },

    #[error("state has weight {0:.3e} outside the maximal Dicke manifold")]
    OutsideDickeManifold(f64),

    #[error("imaginary residual {0:.3e} in the spin Wigner function")]
    ImaginaryResidual(f64),

    #[error("fit needs at least {needed} usable points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl DickeError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Self::InvalidParameter { name, reason: reason.into() }
    }
}
