use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// `|ad − bc|` is within rounding of zero, so no unitary normalization exists.
    #[error("degenerate interaction: determinant {} is not invertible", fmt_signed(*.delta))]
    DegenerateInteraction { delta: f64 },

    /// Sign flips of `a` and `b` preserve the determinant, so `Δ < 0` cannot be
    /// canonicalized away.
    #[error("determinant {} ≤ 0", fmt_signed(*.delta))]
    NegativeDeterminant { delta: f64 },

    #[error("non-finite interaction coefficient {name} = {value}")]
    NonFiniteCoefficient { name: &'static str, value: f64 },

    #[error("balance parameter w must be positive, got {0}")]
    NonpositiveBalance(f64),

    #[error("balance grid must be non-empty and strictly increasing")]
    InvalidBalanceGrid,

    #[error("rescale factor k must be positive, got {0}")]
    NonpositiveScale(f64),

    #[error("grids do not share a step ({left} vs {right})")]
    MismatchedGrids { left: f64, right: f64 },

    #[error("grid resolution exhausted: {needed} samples needed, limit is {limit}")]
    GridResolution { needed: usize, limit: usize },

    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("extrapolation beyond sampled support would drop {mass:e} probability mass")]
    Extrapolation { mass: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid wavefunction: {0}")]
    InvalidWavefunction(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

// Render negative numbers with a true minus sign, e.g. `−2`.
fn fmt_signed(x: f64) -> String {
    if x < 0.0 {
        format!("\u{2212}{}", -x)
    } else {
        format!("{x}")
    }
}
