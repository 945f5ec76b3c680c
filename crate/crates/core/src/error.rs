use thiserror::Error;

use crate::generating::SolvabilityReport;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("t = {t} lies outside the domain [{a}, {b}]")]
    OutsideDomain { t: f64, a: f64, b: f64 },

    #[error("reversed integration bounds: lo = {lo} > hi = {hi}")]
    ReversedBounds { lo: f64, hi: f64 },

    #[error("projector has numerical rank {found}, expected {expected}")]
    InconsistentRank { expected: usize, found: usize },

    #[error("invalid impulse at tau = {tau}: {reason}")]
    InvalidImpulse { tau: f64, reason: String },

    #[error("problem is not solvable (cond1 = {:e}, cond2 = {:e})", .0.cond1_residual, .0.cond2_residual)]
    Unsolvable(Box<SolvabilityReport>),

    #[error("problem carries no control kernel")]
    NoControlKernel,

    #[error("control system Uu = g is inconsistent (criterion residual {criterion_residual:e})")]
    NotRegularizable { criterion_residual: f64 },

    #[error("invalid weight matrix: {0}")]
    InvalidWeight(String),
}

pub type Result<T> = std::result::Result<T, Error>;
