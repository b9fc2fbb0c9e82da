use thiserror::Error;

/// Errors raised by the physics modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("equilibrium solver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("chain unstable: transverse eigenvalue {eigenvalue:e} (rad/s)^2 for mode {mode} is not positive")]
    ChainUnstable { mode: usize, eigenvalue: f64 },

    #[error("outside stable squeezing regime: |g| = {g:e} must be below delta = {delta:e}")]
    UnstableSqueezing { g: f64, delta: f64 },

    #[error("integrator failure at t = {t:e}: {reason}")]
    IntegratorFailure { t: f64, reason: String },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("contrast collapse at t = {t:e}: mean spin length {contrast:e}")]
    ContrastCollapse { t: f64, contrast: f64 },

    #[error("search failed: {0}")]
    SearchFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Checks `value > 0` and finite.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {value}")))
    }
}
