//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on caller-supplied data failed.
    #[error("input error: {0}")]
    Input(String),

    /// An exponent left the double-precision range.
    #[error("overflow guard: {0}")]
    Overflow(String),

    /// The coefficient recursion is undefined (r = 0).
    #[error("recursion undefined at r = 0")]
    UndefinedRecursion,

    /// Adaptive step-size control underflowed; the system is too stiff
    /// for the explicit integrator as configured.
    #[error("stiffness error: step size underflow at t = {t:.6e} (h = {h:.3e}); try a smaller mode count or a smaller interval")]
    Stiffness { t: f64, h: f64 },

    /// Norm growth beyond bound in the grid integrator.
    #[error("step-size error: instability detected at t = {t:.6e} (sup |f| = {norm:.3e})")]
    Instability { t: f64, norm: f64 },

    /// A spectral state reconstructs to a meaningfully negative density.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Undamped fixed-point map is cycling instead of converging.
    #[error("fixed-point oscillation detected (residual {residual:.3e}); try a smaller damping factor")]
    Oscillation { residual: f64 },

    /// Product-space size exceeds the configured memory budget.
    #[error("size budget exceeded: {0}")]
    Budget(String),

    /// Failure reading or parsing an external file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
