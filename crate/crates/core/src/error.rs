//! Crate-wide error type.

/// Errors surfaced by construction, solving, and verification.
///
/// Row indices carried by variants are zero-based; messages print them
/// one-based to match the file format and CSV output.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{context}: expected length {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("row {} is zero; a zero row defines no hyperplane and cannot be sampled", row + 1)]
    ZeroRow { row: usize },

    #[error("vector must be nonzero")]
    ZeroVector,

    #[error("entry ({}, {}) is not finite", row + 1, col + 1)]
    NonFinite { row: usize, col: usize },

    #[error("svd did not converge after {sweeps} sweeps (off-diagonal mass {off_mass:.3e}); input may be degenerate")]
    SvdNoConvergence { sweeps: usize, off_mass: f64 },

    #[error("matrix is rank deficient: smallest singular value {sigma_min:.3e} is below tolerance {tol:.3e}")]
    RankDeficient { sigma_min: f64, tol: f64 },

    #[error("no full-rank draw after {attempts} attempts")]
    DegenerateDraws { attempts: usize },

    #[error("system is inconsistent: residual {residual:.3e} at the provided solution exceeds {bound:.3e}")]
    Inconsistent { residual: f64, bound: f64 },

    #[error("projection onto row {} annihilates the probe, so the normalized next iterate is undefined", row + 1)]
    HypothesisViolation { row: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
