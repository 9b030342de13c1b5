//! Monte Carlo estimation of the solver's expected behavior.
//!
//! An ensemble runs `trials` independent solver instances that differ only
//! in their row-sampling stream (trial `t` is seeded with
//! `mix_seed(cfg.seed, t)`), then reduces per-step sample means and standard
//! errors in trial order, so the statistics are a pure function of the base
//! seed. Trials always run the full `max_iters` (stopping early on residual
//! would bias the step-indexed statistics), and coefficient tracking is
//! always on, since the tracked quantities are built from the coefficients.

use std::io::Write;

use crate::error::{Error, Result};
use crate::io::fmt_scalar;
use crate::kaczmarz::{SolveConfig, SolveState};
use crate::linalg::{dot, frobenius_norm_sq, norm, norm_sq, residual_norm, DenseMatrix, SvdFactorization};
use crate::rng::mix_seed;

/// Sample mean and standard error of one tracked quantity at one step.
/// `samples` is below `trials` when zero iterates forced skips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantityStats {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Statistics for one logged step.
#[derive(Debug, Clone)]
pub struct StepStats {
    pub iter: usize,
    /// Signed coefficients `<x_k - x, v_l>`, one entry per singular direction.
    pub coefficients: Vec<QuantityStats>,
    /// `||x_k - x||^2`.
    pub sq_error: QuantityStats,
    /// Predicted one-step factor `1 - ||A yhat_k||^2 / ||A||_F^2` at the
    /// realized error direction; skipped for zero iterates.
    pub contraction: QuantityStats,
    /// `<yhat_prev, yhat_k>^2` between consecutive logged iterates, both
    /// nonzero.
    pub overlap_sq: QuantityStats,
    /// `||y_k||^2` minus the previous step's predicted expectation of it;
    /// zero-mean when the cadence is 1. Skipped at coarser cadences.
    pub sq_error_gap: QuantityStats,
    /// `overlap_sq` minus the previous step's contraction factor; zero-mean
    /// when the cadence is 1. Skipped at coarser cadences.
    pub overlap_gap: QuantityStats,
    /// Trials whose iterate was exactly zero at this step.
    pub skipped_zero: usize,
}

/// Per-step ensemble statistics over independent solver runs.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub trials: usize,
    pub steps: Vec<StepStats>,
}

impl EnsembleStats {
    /// CSV in long form: `iter,quantity,mean,stderr`. Quantities with no
    /// samples at a step are omitted; a standard error needs at least two.
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "iter,quantity,mean,stderr")?;
        for st in &self.steps {
            for (l, q) in st.coefficients.iter().enumerate() {
                write_row(w, st.iter, &format!("coef_{}", l + 1), q)?;
            }
            write_row(w, st.iter, "sq_error", &st.sq_error)?;
            write_row(w, st.iter, "contraction", &st.contraction)?;
            write_row(w, st.iter, "overlap_sq", &st.overlap_sq)?;
            write_row(w, st.iter, "sq_error_gap", &st.sq_error_gap)?;
            write_row(w, st.iter, "overlap_gap", &st.overlap_gap)?;
        }
        Ok(())
    }
}

fn write_row<W: Write + ?Sized>(
    w: &mut W,
    iter: usize,
    quantity: &str,
    q: &QuantityStats,
) -> std::io::Result<()> {
    if q.samples == 0 {
        return Ok(());
    }
    let stderr = if q.samples >= 2 {
        fmt_scalar(q.stderr)
    } else {
        String::new()
    };
    writeln!(w, "{iter},{quantity},{},{stderr}", fmt_scalar(q.mean))
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accum {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn finish(&self) -> QuantityStats {
        QuantityStats {
            mean: self.mean,
            stderr: if self.n >= 2 {
                (self.m2 / (self.n as f64 * (self.n - 1) as f64)).sqrt()
            } else {
                0.0
            },
            samples: self.n,
        }
    }
}

#[derive(Clone)]
struct StepAccum {
    iter: usize,
    coefficients: Vec<Accum>,
    sq_error: Accum,
    contraction: Accum,
    overlap_sq: Accum,
    sq_error_gap: Accum,
    overlap_gap: Accum,
    skipped_zero: usize,
}

impl StepAccum {
    fn new(iter: usize, n: usize) -> StepAccum {
        StepAccum {
            iter,
            coefficients: vec![Accum::default(); n],
            sq_error: Accum::default(),
            contraction: Accum::default(),
            overlap_sq: Accum::default(),
            sq_error_gap: Accum::default(),
            overlap_gap: Accum::default(),
            skipped_zero: 0,
        }
    }

    fn finish(&self) -> StepStats {
        StepStats {
            iter: self.iter,
            coefficients: self.coefficients.iter().map(Accum::finish).collect(),
            sq_error: self.sq_error.finish(),
            contraction: self.contraction.finish(),
            overlap_sq: self.overlap_sq.finish(),
            sq_error_gap: self.sq_error_gap.finish(),
            overlap_gap: self.overlap_gap.finish(),
            skipped_zero: self.skipped_zero,
        }
    }
}

/// State carried between consecutive logged steps of one trial.
struct PrevLogged {
    y: Vec<f64>,
    sq_error: f64,
    /// Expected next squared error given this iterate: `||y||^2 - ||A y||^2 / F`.
    predicted_next_sq_error: f64,
    contraction: Option<f64>,
}

/// Runs `trials` independent solves of the consistent system `(a, b)` from
/// `x0` and aggregates the quantities realizing the expectation identities:
/// signed singular coefficients, squared error, contraction factor, and
/// step-to-step direction overlap, each with sample mean and standard error
/// per logged step.
pub fn ensemble_run(
    a: &DenseMatrix,
    b: &[f64],
    x0: &[f64],
    cfg: &SolveConfig,
    trials: usize,
    svd: &SvdFactorization,
    true_x: &[f64],
) -> Result<EnsembleStats> {
    cfg.validate()?;
    if trials < 2 {
        return Err(Error::InvalidArgument(format!(
            "ensembles need at least 2 trials, got {trials}"
        )));
    }
    if true_x.len() != a.cols() {
        return Err(Error::Dimension {
            context: "true solution",
            expected: a.cols(),
            actual: true_x.len(),
        });
    }
    if b.len() != a.rows() {
        return Err(Error::Dimension {
            context: "right-hand side",
            expected: a.rows(),
            actual: b.len(),
        });
    }
    let res = residual_norm(a, b, true_x);
    let bound = 1e-10 * norm(b);
    if res > bound {
        return Err(Error::Inconsistent {
            residual: res,
            bound,
        });
    }

    let n = a.cols();
    let frob = frobenius_norm_sq(a);
    let cadence = cfg.trace_every;
    let logged_steps: Vec<usize> = (0..=cfg.max_iters / cadence).map(|s| s * cadence).collect();
    let mut acc: Vec<StepAccum> = logged_steps
        .iter()
        .map(|&iter| StepAccum::new(iter, n))
        .collect();

    for trial in 0..trials {
        let mut state = SolveState::new(a, b, x0, mix_seed(cfg.seed, trial as u64))?;
        let mut prev: Option<PrevLogged> = None;
        for (s, step_acc) in acc.iter_mut().enumerate() {
            if s > 0 {
                for _ in 0..cadence {
                    state.step();
                }
            }
            let y: Vec<f64> = state
                .x()
                .iter()
                .zip(true_x)
                .map(|(xi, ti)| xi - ti)
                .collect();
            let sq_error = norm_sq(&y);
            let coeffs = svd.right_coefficients(&y);
            // ||A y||^2 through the singular basis: sum of (sigma_l c_l)^2.
            let ay_sq: f64 = coeffs
                .iter()
                .zip(svd.sigma())
                .map(|(c, s)| (s * c) * (s * c))
                .sum();

            for (acc_l, &c) in step_acc.coefficients.iter_mut().zip(&coeffs) {
                acc_l.push(c);
            }
            step_acc.sq_error.push(sq_error);

            let contraction = if sq_error > 0.0 {
                let f = 1.0 - ay_sq / (frob * sq_error);
                step_acc.contraction.push(f);
                Some(f)
            } else {
                step_acc.skipped_zero += 1;
                None
            };

            if let Some(p) = &prev {
                if cadence == 1 {
                    step_acc.sq_error_gap.push(sq_error - p.predicted_next_sq_error);
                }
                if p.sq_error > 0.0 && sq_error > 0.0 {
                    let ov = dot(&p.y, &y);
                    let ov_sq = ov * ov / (p.sq_error * sq_error);
                    step_acc.overlap_sq.push(ov_sq);
                    if cadence == 1 {
                        if let Some(pf) = p.contraction {
                            step_acc.overlap_gap.push(ov_sq - pf);
                        }
                    }
                }
            }

            prev = Some(PrevLogged {
                y,
                sq_error,
                predicted_next_sq_error: sq_error - ay_sq / frob,
                contraction,
            });
        }
    }

    Ok(EnsembleStats {
        trials,
        steps: acc.iter().map(StepAccum::finish).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::predicted_coefficient;
    use crate::generators::diagonal;
    use crate::linalg::svd as compute_svd;

    #[test]
    fn distinct_trials_draw_distinct_row_sequences() {
        let a = crate::generators::gaussian_shifted_duplicate(8, 28.0, 0.01, 1).unwrap();
        let b = vec![0.0; 8];
        let x0 = vec![1.0; 8];
        let rows = |trial: u64| -> Vec<usize> {
            let mut st = SolveState::new(&a, &b, &x0, mix_seed(3, trial)).unwrap();
            (0..32).map(|_| st.step()).collect()
        };
        assert_ne!(rows(0), rows(1));
        assert_ne!(rows(1), rows(2));
    }

    #[test]
    fn ensembles_are_deterministic_given_the_base_seed() {
        let a = diagonal(&[2.0, 1.0, 1.0]).unwrap();
        let f = compute_svd(&a).unwrap();
        let cfg = SolveConfig {
            seed: 7,
            max_iters: 5,
            residual_tol: 0.0,
            trace_every: 1,
            track_coefficients: true,
        };
        let run = || {
            ensemble_run(&a, &[0.0; 3], &[1.0; 3], &cfg, 50, &f, &[0.0; 3]).unwrap()
        };
        let (r1, r2) = (run(), run());
        for (s1, s2) in r1.steps.iter().zip(&r2.steps) {
            assert_eq!(s1.sq_error, s2.sq_error);
            assert_eq!(s1.coefficients, s2.coefficients);
        }
    }

    #[test]
    fn diagonal_mean_coefficient_tracks_the_closed_form() {
        // diag(2,1,1) from x0 - x = (1,1,1): the slow directions keep enough
        // survivors for the plain four-standard-error window at k = 10.
        let a = diagonal(&[2.0, 1.0, 1.0]).unwrap();
        let f = compute_svd(&a).unwrap();
        let frob = frobenius_norm_sq(&a);
        let cfg = SolveConfig {
            seed: 11,
            max_iters: 10,
            residual_tol: 0.0,
            trace_every: 1,
            track_coefficients: true,
        };
        let trials = 10_000;
        let stats = ensemble_run(&a, &[0.0; 3], &[1.0; 3], &cfg, trials, &f, &[0.0; 3]).unwrap();
        let floor = crate::linalg::norm(&[1.0, 1.0, 1.0]) / trials as f64;
        for l in 1..3 {
            let q = stats.steps[10].coefficients[l];
            let want = predicted_coefficient(f.sigma()[l], frob, 10, 1.0).unwrap();
            let dev = (q.mean - want).abs();
            assert!(
                dev <= 4.0 * (q.stderr + floor),
                "l = {l}: mean {} vs predicted {want} (stderr {})",
                q.mean,
                q.stderr
            );
        }
        // The fast direction needs the resolution floor: its survival
        // probability at k = 10 is below 1/trials.
        let q = stats.steps[10].coefficients[0];
        let want = predicted_coefficient(f.sigma()[0], frob, 10, 1.0).unwrap();
        assert!((q.mean - want).abs() <= 4.0 * (q.stderr + floor));
    }

    #[test]
    fn gap_statistics_are_centered_at_zero() {
        let (a, true_x, b) = crate::generators::random_consistent(10, 4, 17).unwrap();
        let f = compute_svd(&a).unwrap();
        let cfg = SolveConfig {
            seed: 23,
            max_iters: 20,
            residual_tol: 0.0,
            trace_every: 1,
            track_coefficients: true,
        };
        let x0 = vec![0.0; 4];
        let stats = ensemble_run(&a, &b, &x0, &cfg, 4000, &f, &true_x).unwrap();
        for st in &stats.steps[1..] {
            let g = st.sq_error_gap;
            assert!(g.samples >= 2);
            assert!(g.mean.abs() <= 4.0 * g.stderr, "iter {}: gap {} stderr {}", st.iter, g.mean, g.stderr);
            let og = st.overlap_gap;
            assert!(og.mean.abs() <= 4.0 * og.stderr, "iter {}: overlap gap {} stderr {}", st.iter, og.mean, og.stderr);
        }
    }

    #[test]
    fn zero_iterates_are_skipped_and_counted() {
        // On the identity every trial reaches x = 0 exactly, after which the
        // direction quantities are undefined and must be skipped.
        let a = crate::linalg::DenseMatrix::identity(2);
        let f = compute_svd(&a).unwrap();
        let cfg = SolveConfig {
            seed: 1,
            max_iters: 40,
            residual_tol: 0.0,
            trace_every: 1,
            track_coefficients: true,
        };
        let stats = ensemble_run(&a, &[0.0; 2], &[1.0; 2], &cfg, 100, &f, &[0.0; 2]).unwrap();
        let last = stats.steps.last().unwrap();
        assert_eq!(last.skipped_zero, 100);
        assert_eq!(last.contraction.samples, 0);
        assert_eq!(last.sq_error.samples, 100);
        assert_eq!(last.sq_error.mean, 0.0);
    }

    #[test]
    fn csv_has_the_long_format_and_parses_back() {
        let a = diagonal(&[2.0, 1.0]).unwrap();
        let f = compute_svd(&a).unwrap();
        let cfg = SolveConfig {
            seed: 3,
            max_iters: 4,
            residual_tol: 0.0,
            trace_every: 1,
            track_coefficients: true,
        };
        let stats = ensemble_run(&a, &[0.0; 2], &[1.0; 2], &cfg, 30, &f, &[0.0; 2]).unwrap();
        let mut buf = Vec::new();
        stats.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iter,quantity,mean,stderr"));
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 4);
            fields[0].parse::<usize>().unwrap();
            assert!(!fields[1].is_empty());
            fields[2].parse::<f64>().unwrap();
            if !fields[3].is_empty() {
                fields[3].parse::<f64>().unwrap();
            }
        }
        assert!(text.contains(",coef_1,"));
        assert!(text.contains(",sq_error,"));
        assert!(text.contains(",contraction,"));
    }

    #[test]
    fn too_few_trials_is_rejected() {
        let a = diagonal(&[1.0, 1.0]).unwrap();
        let f = compute_svd(&a).unwrap();
        let err = ensemble_run(
            &a,
            &[0.0; 2],
            &[1.0; 2],
            &SolveConfig::default(),
            1,
            &f,
            &[0.0; 2],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
