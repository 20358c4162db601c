use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("potential is not real: |V(-{mode}) - conj V({mode})| = {asymmetry:.3e}")]
    NonHermitian { mode: i64, asymmetry: f64 },

    #[error("eigensolver failed at k = {k}")]
    EigenSolve { k: f64 },

    #[error("band {band} is not isolated at k = {k}: gap {gap:.3e} <= {tol:.1e}")]
    IsolatednessViolation {
        band: usize,
        k: f64,
        gap: f64,
        tol: f64,
    },

    #[error("gauge reference component {mode} vanishes at k = {k}")]
    GaugeSingular { k: f64, mode: i64 },

    #[error("t = {t} is at or beyond the first caustic (t = {caustic})")]
    PostCaustic { t: f64, caustic: f64 },

    #[error("grid does not resolve the lattice: dx = {dx:.3e} > {limit:.3e}")]
    Resolution { dx: f64, limit: f64 },

    #[error("field reached the box edge at t = {t}: |psi| = {magnitude:.3e}")]
    EdgeLeakage { t: f64, magnitude: f64 },

    #[error("nonlinear overflow; last valid time t = {last_valid}")]
    Overflow { last_valid: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config {}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("malformed field file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
