//! The randomized row-projection solver.
//!
//! For `A x = b` with rows `a_i`, each step samples row `i` with probability
//! `||a_i||^2 / ||A||_F^2` and projects the iterate onto the hyperplane
//! `<a_i, x> = b_i`:
//!
//! ```text
//! x' = x + (b_i - <a_i, x>) / ||a_i||^2 * a_i
//! ```
//!
//! The update moves `x` the smallest possible amount that makes the chosen
//! equation hold, so the distance to any point of the solution set never
//! increases. Runs are driven by an explicit seed and are bit-reproducible.

use std::io::Write;

use crate::error::{Error, Result};
use crate::io::fmt_scalar;
use crate::linalg::{dot, norm, norm_sq, residual_norm, DenseMatrix, SvdFactorization};
use crate::rng::Prng;

/// Cumulative-weight table realizing `P(i) = ||a_i||^2 / ||A||_F^2`.
#[derive(Debug, Clone)]
pub struct RowSampler {
    cumulative: Vec<f64>,
    total: f64,
}

/// Builds the sampling table; errors on the first zero row found.
pub fn build_sampler(a: &DenseMatrix) -> Result<RowSampler> {
    let mut cumulative = Vec::with_capacity(a.rows());
    let mut acc = 0.0;
    for i in 0..a.rows() {
        let w = norm_sq(a.row(i));
        if w == 0.0 {
            return Err(Error::ZeroRow { row: i });
        }
        acc += w;
        cumulative.push(acc);
    }
    Ok(RowSampler {
        total: acc,
        cumulative,
    })
}

impl RowSampler {
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Total weight `||A||_F^2` (up to summation-order roundoff).
    pub fn total(&self) -> f64 {
        self.total
    }

    /// The row bucket containing `u` in `[0, total)`: the first index whose
    /// cumulative weight exceeds `u`.
    pub fn locate(&self, u: f64) -> usize {
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1)
    }
}

/// Draws a row index with probability proportional to its squared norm, by
/// binary search of one uniform draw against the cumulative table.
pub fn sample_row(s: &RowSampler, rng: &mut Prng) -> usize {
    s.locate(rng.next_f64() * s.total)
}

/// Projects `x` onto the hyperplane `<a_i, x> = b_i`. After the step the
/// chosen equation holds to roundoff and `x' - x` is parallel to `a_i`.
pub fn project_step(a: &DenseMatrix, b: &[f64], x: &[f64], i: usize) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension {
            context: "right-hand side",
            expected: a.rows(),
            actual: b.len(),
        });
    }
    if x.len() != a.cols() {
        return Err(Error::Dimension {
            context: "iterate",
            expected: a.cols(),
            actual: x.len(),
        });
    }
    let row = a.row(i);
    let w = norm_sq(row);
    if w == 0.0 {
        return Err(Error::ZeroRow { row: i });
    }
    let mut out = x.to_vec();
    project_in_place(row, b[i], w, &mut out);
    Ok(out)
}

fn project_in_place(row: &[f64], b_i: f64, row_norm_sq: f64, x: &mut [f64]) {
    let scale = (b_i - dot(row, x)) / row_norm_sq;
    for (xj, aj) in x.iter_mut().zip(row) {
        *xj += scale * aj;
    }
}

/// Solver parameters. `seed` drives the row sampling stream; iteration stops
/// at `max_iters` or once the residual (recomputed only at the `trace_every`
/// logging cadence, since it costs a full `m x n` pass) falls to
/// `residual_tol`.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub seed: u64,
    pub max_iters: usize,
    pub residual_tol: f64,
    pub trace_every: usize,
    pub track_coefficients: bool,
}

impl Default for SolveConfig {
    fn default() -> SolveConfig {
        SolveConfig {
            seed: 0,
            max_iters: 1000,
            residual_tol: 0.0,
            trace_every: 10,
            track_coefficients: false,
        }
    }
}

impl SolveConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if self.trace_every == 0 {
            return Err(Error::InvalidArgument("trace_every must be at least 1".into()));
        }
        if self.residual_tol.is_nan() || self.residual_tol < 0.0 {
            return Err(Error::InvalidArgument("residual_tol must be nonnegative".into()));
        }
        Ok(())
    }
}

/// One logged step. `row` is the row applied at this iteration (`None` for
/// the initial state); optional fields are present when the quantities are
/// defined and requested.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub row: Option<usize>,
    pub residual: f64,
    /// `||x_k - x||` when the true solution is known.
    pub error: Option<f64>,
    /// `||A x_k|| / ||x_k||`, logged for homogeneous systems while `x_k != 0`.
    pub rayleigh: Option<f64>,
    /// `<x_k - x, v_l>` for every `l`, when coefficient tracking is on.
    pub coefficients: Option<Vec<f64>>,
    /// `|<(x_k - x)/||x_k - x||, v_n>|`, when an SVD and true solution are given.
    pub overlap_vn: Option<f64>,
}

/// Per-run log at the configured cadence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterateTrace {
    /// Number of coefficient columns, when tracked.
    pub coefficient_count: Option<usize>,
    pub rows: Vec<TraceRow>,
}

impl IterateTrace {
    /// Trace CSV: `iter,row,residual,error,rayleigh` plus `coef_1..coef_n`
    /// when coefficients are tracked. `row` is one-based; unavailable fields
    /// are left empty; scalars carry 17 significant digits.
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> std::io::Result<()> {
        write!(w, "iter,row,residual,error,rayleigh")?;
        if let Some(n) = self.coefficient_count {
            for l in 1..=n {
                write!(w, ",coef_{l}")?;
            }
        }
        writeln!(w)?;
        for r in &self.rows {
            let row = r.row.map_or(String::new(), |i| (i + 1).to_string());
            write!(
                w,
                "{},{},{},{},{}",
                r.iter,
                row,
                fmt_scalar(r.residual),
                opt(r.error),
                opt(r.rayleigh)
            )?;
            if let Some(n) = self.coefficient_count {
                match &r.coefficients {
                    Some(c) => {
                        for &x in c {
                            write!(w, ",{}", fmt_scalar(x))?;
                        }
                    }
                    None => {
                        for _ in 0..n {
                            write!(w, ",")?;
                        }
                    }
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Quotient-evolution CSV: `iter,rayleigh,overlap`.
    pub fn write_rayleigh_csv<W: Write + ?Sized>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "iter,rayleigh,overlap")?;
        for r in &self.rows {
            writeln!(w, "{},{},{}", r.iter, opt(r.rayleigh), opt(r.overlap_vn))?;
        }
        Ok(())
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), fmt_scalar)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ResidualTol,
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
    pub trace: IterateTrace,
}

/// Sampler, iterate, and RNG for one run; stepping is strictly sequential.
/// Shared by the full solver loop and the ensemble driver so both consume
/// identical random streams for a given seed.
pub struct SolveState<'a> {
    a: &'a DenseMatrix,
    b: &'a [f64],
    sampler: RowSampler,
    row_norms_sq: Vec<f64>,
    rng: Prng,
    x: Vec<f64>,
    iteration: usize,
}

impl<'a> SolveState<'a> {
    pub fn new(a: &'a DenseMatrix, b: &'a [f64], x0: &[f64], seed: u64) -> Result<SolveState<'a>> {
        if b.len() != a.rows() {
            return Err(Error::Dimension {
                context: "right-hand side",
                expected: a.rows(),
                actual: b.len(),
            });
        }
        if x0.len() != a.cols() {
            return Err(Error::Dimension {
                context: "initial iterate",
                expected: a.cols(),
                actual: x0.len(),
            });
        }
        let sampler = build_sampler(a)?;
        let row_norms_sq = (0..a.rows()).map(|i| norm_sq(a.row(i))).collect();
        Ok(SolveState {
            a,
            b,
            sampler,
            row_norms_sq,
            rng: Prng::new(seed),
            x: x0.to_vec(),
            iteration: 0,
        })
    }

    /// Samples one row, projects onto its hyperplane, and returns the row.
    pub fn step(&mut self) -> usize {
        let i = sample_row(&self.sampler, &mut self.rng);
        project_in_place(self.a.row(i), self.b[i], self.row_norms_sq[i], &mut self.x);
        self.iteration += 1;
        i
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn residual(&self) -> f64 {
        residual_norm(self.a, self.b, &self.x)
    }
}

/// Runs the randomized solver, logging every `trace_every` iterations.
///
/// When `true_x` is given the system must be consistent
/// (`||A true_x - b|| <= 1e-10 ||b||`) and the trace carries the error norm;
/// with an SVD as well it carries the overlap with `v_n`, plus the full
/// singular coefficients `<x_k - x, v_l>` if `track_coefficients` is set.
/// Starting at `x0 = true_x` is permitted; every step is then a no-op to
/// roundoff.
pub fn solve(
    a: &DenseMatrix,
    b: &[f64],
    x0: &[f64],
    cfg: &SolveConfig,
    true_x: Option<&[f64]>,
    svd: Option<&SvdFactorization>,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    if let Some(tx) = true_x {
        if tx.len() != a.cols() {
            return Err(Error::Dimension {
                context: "true solution",
                expected: a.cols(),
                actual: tx.len(),
            });
        }
        if b.len() != a.rows() {
            return Err(Error::Dimension {
                context: "right-hand side",
                expected: a.rows(),
                actual: b.len(),
            });
        }
        let res = residual_norm(a, b, tx);
        let bound = 1e-10 * norm(b);
        if res > bound {
            return Err(Error::Inconsistent {
                residual: res,
                bound,
            });
        }
    }

    let mut state = SolveState::new(a, b, x0, cfg.seed)?;
    let homogeneous = b.iter().all(|&v| v == 0.0);
    let mut trace = IterateTrace {
        coefficient_count: (cfg.track_coefficients && true_x.is_some() && svd.is_some())
            .then(|| a.cols()),
        rows: Vec::new(),
    };

    let log = |state: &SolveState, row: Option<usize>, trace: &mut IterateTrace| -> f64 {
        let residual = state.residual();
        let x = state.x();
        let error_vec = true_x.map(|tx| {
            x.iter()
                .zip(tx)
                .map(|(xi, ti)| xi - ti)
                .collect::<Vec<f64>>()
        });
        let error = error_vec.as_ref().map(|e| norm(e));
        let rayleigh = if homogeneous {
            let nx = norm(x);
            (nx > 0.0).then(|| norm(&mat_apply(a, x)) / nx)
        } else {
            None
        };
        let coefficients = match (&error_vec, svd, cfg.track_coefficients) {
            (Some(e), Some(f), true) => Some(f.right_coefficients(e)),
            _ => None,
        };
        let overlap_vn = match (&error_vec, svd) {
            (Some(e), Some(f)) => {
                let ne = norm(e);
                (ne > 0.0).then(|| (dot(e, &f.v_column(a.cols() - 1)) / ne).abs())
            }
            _ => None,
        };
        trace.rows.push(TraceRow {
            iter: state.iteration(),
            row,
            residual,
            error,
            rayleigh,
            coefficients,
            overlap_vn,
        });
        residual
    };

    let residual0 = log(&state, None, &mut trace);
    if residual0 <= cfg.residual_tol {
        return Ok(SolveOutcome {
            x: state.x,
            iterations: 0,
            stop: StopReason::ResidualTol,
            trace,
        });
    }

    let mut stop = StopReason::MaxIters;
    for k in 1..=cfg.max_iters {
        let row = state.step();
        if k % cfg.trace_every == 0 {
            let residual = log(&state, Some(row), &mut trace);
            if residual <= cfg.residual_tol {
                stop = StopReason::ResidualTol;
                break;
            }
        }
    }

    Ok(SolveOutcome {
        iterations: state.iteration,
        x: state.x,
        stop,
        trace,
    })
}

fn mat_apply(a: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    (0..a.rows()).map(|i| dot(a.row(i), x)).collect()
}
