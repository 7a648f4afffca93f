use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Mode index violates `|m| ≤ n` or the parity rule `n − |m|` even.
    #[error("invalid mode index (n={n}, m={m}): {reason}")]
    InvalidMode { n: i64, m: i64, reason: &'static str },

    /// Argument outside the supported numeric domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed half-integer angular-momentum triple.
    #[error("invalid angular-momentum triple: {0}")]
    InvalidTriple(String),

    /// Quadrature rule too coarse for the requested operation.
    #[error("quadrature capacity {capacity} insufficient (needs ≥ {required})")]
    Capacity { capacity: usize, required: usize },

    /// A truncated series failed its tail-of-series accuracy check.
    #[error("series truncation did not converge: {0}")]
    Convergence(String),

    /// Input carries no usable content (e.g. vanishing captured norm).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Two-photon coefficient matrix is identically zero.
    #[error("empty two-photon state: {0}")]
    EmptyState(String),

    /// Iterative Hermitian diagonalization exhausted its sweep budget.
    #[error("eigensolver failed to converge within {0} sweeps")]
    EigensolverFailure(usize),

    /// Underlying I/O failure while reading or writing a file format.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed on-disk data.
    #[error("parse error: {0}")]
    Parse(String),
}
