//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VpbError {
    #[error("dimension mismatch: expected {expected} values, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("non-physical moments: rho = {rho:e}, theta = {theta:e}")]
    NonPhysical { rho: f64, theta: f64 },

    #[error("ill-conditioned weighted inner product: {0}")]
    IllConditioned(String),

    #[error("input is not microscopic: macroscopic residual {residual:e} exceeds {tolerance:e}")]
    ProjectionViolation { residual: f64, tolerance: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("grid too large for the hard-sphere oracle: {nodes} nodes (limit {limit})")]
    GridTooLarge { nodes: usize, limit: usize },

    #[error("inadmissible wave: {0}")]
    Inadmissible(String),

    #[error("wave construction failed: {0}")]
    Construction(String),

    #[error("shock profile failed: {0}")]
    Profile(String),

    #[error("linear system is near-singular (condition number {condition:e})")]
    Conditioning { condition: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite state at step {step} (t = {time})")]
    NonFinite { step: u64, time: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, VpbError>;

impl VpbError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        VpbError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
