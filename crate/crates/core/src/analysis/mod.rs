//! Expectation oracles and ensemble statistics for the solver's behavior
//! along singular directions.
//!
//! The one-step oracles enumerate every possible row choice with its exact
//! probability, so they compute conditional expectations without sampling.
//! Each has a closed form they are tested against:
//!
//! * coefficient decay: `E <y', v_l> = (1 - sigma_l^2 / ||A||_F^2) <y, v_l>`,
//!   so the error component along `v_l` shrinks geometrically at a rate set
//!   by its singular value, slowest along `v_n`;
//! * squared-error contraction: `E ||y'||^2 = (1 - ||A yhat||^2 / ||A||_F^2) ||y||^2`
//!   for consistent systems (an equality: each projection obeys Pythagoras
//!   exactly, so taking expectations loses nothing);
//! * directional stability: `E <yhat, yhat'>^2 = 1 - ||A yhat||^2 / ||A||_F^2`,
//!   provided no single projection can annihilate `y`.
//!
//! Here `y = x_k - x` is the error, valid because running the method on
//! `(A, b)` from `x0` is step-for-step the method on `(A, 0)` from `x0 - x`.

mod ensemble;
mod report;

pub use ensemble::{ensemble_run, EnsembleStats, QuantityStats, StepStats};
pub use report::{
    mc_deviation, verify_theorem, TheoremCheck, TheoremReport, VerifyConfig, VerifyMode,
};

use crate::error::{Error, Result};
use crate::kaczmarz::{solve, SolveConfig, SolveOutcome};
use crate::linalg::{dot, frobenius_norm_sq, norm, norm_sq, DenseMatrix, SvdFactorization};

/// Below this fraction of `||y||`, a projected outcome is treated as an exact
/// annihilation of the probe (the stability identity's hypothesis fails).
const ANNIHILATION_TOL: f64 = 1e-14;

/// Coefficients of `e` in the right singular basis, `(<e, v_1>, ..., <e, v_n>)`.
pub fn singular_coefficients(svd: &SvdFactorization, e: &[f64]) -> Result<Vec<f64>> {
    if e.len() != svd.v().rows() {
        return Err(Error::Dimension {
            context: "coefficient operand",
            expected: svd.v().rows(),
            actual: e.len(),
        });
    }
    Ok(svd.right_coefficients(e))
}

/// Closed-form expected coefficient after `k` steps:
/// `(1 - sigma_l^2 / frob_sq)^k * c0`.
pub fn predicted_coefficient(sigma_l: f64, frob_sq: f64, k: usize, c0: f64) -> Result<f64> {
    if frob_sq.is_nan() || frob_sq <= 0.0 || sigma_l < 0.0 || sigma_l * sigma_l > frob_sq * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= sigma^2 <= frob_sq, got sigma = {sigma_l}, frob_sq = {frob_sq}"
        )));
    }
    // Roundoff can push sigma_1^2 a hair past the Frobenius mass.
    let factor = (1.0 - sigma_l * sigma_l / frob_sq).clamp(0.0, 1.0);
    Ok(factor.powi(k as i32) * c0)
}

/// Exact one-step expectation of the coefficient along `v_l`, by enumeration:
/// `sum_i (||a_i||^2 / ||A||_F^2) <y - (<a_i, y> / ||a_i||^2) a_i, v_l>`.
///
/// Deliberately evaluates the projected vectors one row at a time rather than
/// using the algebraic simplification it is tested against.
pub fn theorem1_one_step_oracle(
    a: &DenseMatrix,
    svd: &SvdFactorization,
    y: &[f64],
    l: usize,
) -> Result<f64> {
    if y.len() != a.cols() {
        return Err(Error::Dimension {
            context: "probe",
            expected: a.cols(),
            actual: y.len(),
        });
    }
    let frob = frobenius_norm_sq(a);
    let vl = svd.v_column(l);
    let mut expectation = 0.0;
    for i in 0..a.rows() {
        let (w, projected) = project_onto_row_complement(a, y, i)?;
        expectation += w / frob * dot(&projected, &vl);
    }
    Ok(expectation)
}

/// `1 - ||A y||^2 / (||A||_F^2 ||y||^2)`: the expected one-step multiplier of
/// the squared error when the error direction is `y`. Always within
/// `[1 - sigma_1^2 / ||A||_F^2, 1 - sigma_n^2 / ||A||_F^2]`.
pub fn contraction_factor(a: &DenseMatrix, y: &[f64]) -> Result<f64> {
    if y.len() != a.cols() {
        return Err(Error::Dimension {
            context: "probe",
            expected: a.cols(),
            actual: y.len(),
        });
    }
    let y_sq = norm_sq(y);
    if y_sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    let ay_sq: f64 = (0..a.rows()).map(|i| dot(a.row(i), y).powi(2)).sum();
    Ok(1.0 - ay_sq / (frobenius_norm_sq(a) * y_sq))
}

/// Exact one-step expectation of the squared error, by enumeration:
/// `sum_i (||a_i||^2 / ||A||_F^2) ||y - (<a_i, y> / ||a_i||^2) a_i||^2`.
///
/// For consistent systems this equals `contraction_factor(a, y) * ||y||^2`.
pub fn theorem2_one_step_oracle(a: &DenseMatrix, y: &[f64]) -> Result<f64> {
    if y.len() != a.cols() {
        return Err(Error::Dimension {
            context: "probe",
            expected: a.cols(),
            actual: y.len(),
        });
    }
    let frob = frobenius_norm_sq(a);
    let mut expectation = 0.0;
    for i in 0..a.rows() {
        let (w, projected) = project_onto_row_complement(a, y, i)?;
        expectation += w / frob * norm_sq(&projected);
    }
    Ok(expectation)
}

/// Exact one-step expectation of the squared overlap between consecutive
/// normalized errors, by enumeration over normalized outcomes. Equals
/// `1 - ||A yhat||^2 / ||A||_F^2`.
///
/// Requires that no row annihilate the probe (`P(x_{k+1} = x) = 0`);
/// violations report the offending row.
pub fn theorem3_one_step_oracle(a: &DenseMatrix, y: &[f64]) -> Result<f64> {
    if y.len() != a.cols() {
        return Err(Error::Dimension {
            context: "probe",
            expected: a.cols(),
            actual: y.len(),
        });
    }
    let y_norm = norm(y);
    if y_norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let frob = frobenius_norm_sq(a);
    let mut expectation = 0.0;
    for i in 0..a.rows() {
        let (w, projected) = project_onto_row_complement(a, y, i)?;
        let p_norm = norm(&projected);
        if p_norm <= ANNIHILATION_TOL * y_norm {
            return Err(Error::HypothesisViolation { row: i });
        }
        let overlap = dot(y, &projected) / (y_norm * p_norm);
        expectation += w / frob * overlap * overlap;
    }
    Ok(expectation)
}

/// Squared-norm weight of row `i` and the projection of `y` onto the
/// complement of that row's hyperplane normal.
fn project_onto_row_complement(a: &DenseMatrix, y: &[f64], i: usize) -> Result<(f64, Vec<f64>)> {
    let row = a.row(i);
    let w = norm_sq(row);
    if w == 0.0 {
        return Err(Error::ZeroRow { row: i });
    }
    let scale = dot(row, y) / w;
    Ok((w, y.iter().zip(row).map(|(yj, aj)| yj - scale * aj).collect()))
}

/// Drives `||A x_k|| / ||x_k||` toward `sigma_n` by running the solver on
/// `A x = 0` from a nonzero start. The trace logs the quotient each cadence
/// and, when an SVD is supplied, the overlap `|<x_k / ||x_k||, v_n>|`.
pub fn minimize_rayleigh(
    a: &DenseMatrix,
    x0: &[f64],
    cfg: &SolveConfig,
    svd: Option<&SvdFactorization>,
) -> Result<SolveOutcome> {
    if norm_sq(x0) == 0.0 {
        // Zero is a fixed point of the homogeneous iteration.
        return Err(Error::ZeroVector);
    }
    let b = vec![0.0; a.rows()];
    let origin = vec![0.0; a.cols()];
    solve(a, &b, x0, cfg, Some(&origin), svd)
}
