//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("evaluation outside the declared domain: {0}")]
    Domain(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("not a saddle: {0}")]
    NotASaddle(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("orbit error: {0}")]
    Orbit(String),
    #[error("point outside the model validity region: {0}")]
    Validity(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("state selection failed: {0}")]
    Selection(String),
    #[error("insufficient signal: {0}")]
    InsufficientSignal(String),
    #[error("energy resolution too coarse: {0}")]
    Resolution(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
