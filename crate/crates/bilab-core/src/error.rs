//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("spectral parameter too close to the spectrum (distance {distance:.3e})")]
    NearSpectrum { distance: f64 },

    #[error("linear solver failure: {0}")]
    SolverFailure(String),

    #[error("eigensolver failure: {0}")]
    EigenFailure(String),

    #[error("vector fields differ on the boundary collar (max |B1-B2| = {max_diff:.3e})")]
    CollarMismatch { max_diff: f64 },

    #[error("probe parameter out of range: {0}")]
    InvalidProbe(String),

    #[error("domain diameter {diameter:.3} exceeds the probe growth bound (limit {limit}); pass an explicit override")]
    DomainTooLarge { diameter: f64, limit: f64 },

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error("reconstruction error: {0}")]
    Reconstruction(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
