use thiserror::Error;

/// Errors raised by the numerical kernel, the constructions and the certificates.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("t = {t} outside domain [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },
    #[error("derivative order {requested} unavailable (profile provides up to {available})")]
    Order { requested: u8, available: u8 },
    #[error("quadrature did not converge on [{a}, {b}]: {reason}")]
    Convergence { a: f64, b: f64, reason: String },
    #[error("root not bracketed: f({a}) and f({b}) have the same sign")]
    Bracket { a: f64, b: f64 },
    #[error("ODE step underflow at t = {t}")]
    Step { t: f64 },
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("cannot pack the requested bubbles at scale index {k}")]
    Packing { k: usize },
    #[error("point is a puncture of the bubble metric (bubble {index})")]
    Puncture { index: usize },
    #[error("radius {r} lies within 1e-6 of the kink of psi at {kink}")]
    Kink { r: f64, kink: f64 },
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),
    #[error("gauge solution crosses zero near r = {r}")]
    Blowup { r: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Param(msg.into()))
}
