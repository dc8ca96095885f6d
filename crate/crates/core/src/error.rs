//! Shared error type for the analysis engines.

use thiserror::Error;

/// Errors raised by model construction, series arithmetic, and the engines.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received an argument outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The offered load does not admit a stationary regime.
    #[error("unstable model: rho = {rho} >= 1")]
    Unstable { rho: f64 },

    /// A numerical procedure failed to converge or produced an inconsistent
    /// result; the message carries diagnostics.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The tail-asymptotics machinery does not apply to this model
    /// (e.g. both the service time and the batch size are light-tailed).
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// Two series with different truncations were combined.
    #[error("truncation mismatch: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
