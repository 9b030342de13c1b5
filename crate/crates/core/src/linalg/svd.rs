//! Singular value decomposition by one-sided Jacobi.
//!
//! The factorization is the ground-truth oracle for every identity this crate
//! verifies, so it favors accuracy over speed. One-sided Jacobi applies plane
//! rotations that orthogonalize pairs of columns of a working copy `B` of `A`
//! while accumulating the same rotations into `V`; on convergence `B = U S`
//! column by column, with `A = U S V^T`. The method delivers high relative
//! accuracy even for tiny singular values, which matters because the planted
//! test matrices carry one singular value several orders of magnitude below
//! the bulk.

use super::{frobenius_norm_sq, DenseMatrix};
use crate::error::{Error, Result};

/// Sweep limit before the input is declared degenerate.
const MAX_SWEEPS: usize = 60;

/// Bound on the off-diagonal mass of the column Gram matrix,
/// `sqrt(sum of <b_p, b_q>^2 over p < q)`, relative to `||A||_F^2` (the Gram
/// trace), guaranteed at convergence.
const CONVERGENCE_TOL: f64 = 1e-14;

/// Per-pair settling threshold. A pair is left alone once its Gram
/// off-diagonal is below this fraction of the geometric mean of the
/// diagonals; a sweep that settles every pair is converged. The criterion is
/// relative, so columns carrying a tiny singular value are polished to the
/// same relative orthogonality as the rest; an absolute cutoff would leave
/// their directions unresolved. Settling every pair implies an off-diagonal
/// mass of at most `1e-15 / sqrt(2) * ||A||_F^2`, within [`CONVERGENCE_TOL`].
const PAIR_SKIP_TOL: f64 = 1e-15;

/// Column norms below this fraction of `||A||_F` are exact-zero singular
/// values for this purpose: such a column is rotation roundoff with no
/// meaningful direction, so its Gram row can never settle relative to its
/// own size. Well below [`super::RANK_TOL`], so no rank decision changes.
const NEGLIGIBLE_SIGMA_REL: f64 = 1e-13;

/// `A = U S V^T` with `U` (m x n) and `V` (n x n) orthonormal by columns and
/// the singular values sorted descending.
///
/// Sign convention: in every column of `V` the entry of largest magnitude is
/// positive (ties resolved toward the lowest index), with the matching `U`
/// column flipped in tandem, so factorizations are deterministic.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    u: DenseMatrix,
    sigma: Vec<f64>,
    v: DenseMatrix,
}

impl SvdFactorization {
    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    /// Singular values, descending.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma[0]
    }

    pub fn sigma_min(&self) -> f64 {
        *self.sigma.last().unwrap()
    }

    /// Right singular vector for `sigma[l]` (zero-based).
    pub fn v_column(&self, l: usize) -> Vec<f64> {
        let n = self.v.rows();
        (0..n).map(|i| self.v.get(i, l)).collect()
    }

    /// `V^T e`: the coefficients of `e` in the right singular basis.
    pub fn right_coefficients(&self, e: &[f64]) -> Vec<f64> {
        let n = self.v.rows();
        debug_assert_eq!(e.len(), n);
        let mut out = vec![0.0; n];
        for (i, &ei) in e.iter().enumerate() {
            let row = self.v.row(i);
            for (o, &vij) in out.iter_mut().zip(row) {
                *o += ei * vij;
            }
        }
        out
    }

    /// Full-rank test at the solver tolerance `sigma_n > RANK_TOL * sigma_1`.
    pub fn is_full_rank(&self) -> bool {
        self.sigma_min() > super::RANK_TOL * self.sigma_max()
    }
}

/// Column-major working storage: column `j` of an `rows x cols` matrix lives
/// at `data[j * rows .. (j + 1) * rows]`, so rotations touch contiguous runs.
struct Columns {
    rows: usize,
    data: Vec<f64>,
}

impl Columns {
    fn from_matrix(a: &DenseMatrix) -> Columns {
        let (m, n) = (a.rows(), a.cols());
        let mut data = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                data[j * m + i] = a.get(i, j);
            }
        }
        Columns { rows: m, data }
    }

    fn identity(n: usize) -> Columns {
        let mut data = vec![0.0; n * n];
        for j in 0..n {
            data[j * n + j] = 1.0;
        }
        Columns { rows: n, data }
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Borrows columns `p < q` mutably at once.
    fn col_pair_mut(&mut self, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
        debug_assert!(p < q);
        let (head, tail) = self.data.split_at_mut(q * self.rows);
        (
            &mut head[p * self.rows..(p + 1) * self.rows],
            &mut tail[..self.rows],
        )
    }

    fn rotate(&mut self, p: usize, q: usize, c: f64, s: f64) {
        let (cp, cq) = self.col_pair_mut(p, q);
        for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
            let (xp, xq) = (*x, *y);
            *x = c * xp - s * xq;
            *y = s * xp + c * xq;
        }
    }
}

/// One-sided Jacobi SVD for `m >= n`.
///
/// Errors with [`Error::SvdNoConvergence`] if the off-diagonal mass has not
/// fallen below the threshold after the sweep limit.
pub fn svd(a: &DenseMatrix) -> Result<SvdFactorization> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::InvalidArgument(format!(
            "svd requires rows >= cols, got {m}x{n}"
        )));
    }

    let frob_sq = frobenius_norm_sq(a);
    let negligible = NEGLIGIBLE_SIGMA_REL * frob_sq.sqrt();
    let negligible_sq = negligible * negligible;
    let mut b = Columns::from_matrix(a);
    let mut v = Columns::identity(n);

    let mut converged = false;
    let mut last_mass = 0.0;
    for _sweep in 0..MAX_SWEEPS {
        let mut off_mass_sq = 0.0;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let app = super::norm_sq(b.col(p));
                let aqq = super::norm_sq(b.col(q));
                if app <= negligible_sq || aqq <= negligible_sq {
                    continue;
                }
                let apq = super::dot(b.col(p), b.col(q));
                off_mass_sq += apq * apq;
                if apq == 0.0 || apq.abs() <= PAIR_SKIP_TOL * (app * aqq).sqrt() {
                    continue;
                }
                // Rotation angle that zeroes the (p, q) Gram entry, in the
                // numerically stable tangent form.
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                b.rotate(p, q, c, s);
                v.rotate(p, q, c, s);
                rotated = true;
            }
        }
        last_mass = off_mass_sq.sqrt();
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence {
            sweeps: MAX_SWEEPS,
            off_mass: last_mass,
        });
    }
    debug_assert!(last_mass <= CONVERGENCE_TOL * frob_sq);

    // Extract singular values, sort descending (stable in the original
    // column order for ties), and normalize the B columns into U. Norms at
    // the negligibility floor are clamped to exact zeros and their U columns
    // filled by orthogonal completion.
    let norms: Vec<f64> = (0..n)
        .map(|j| {
            let nrm = super::norm(b.col(j));
            if nrm > negligible {
                nrm
            } else {
                0.0
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for &j in &order {
        if norms[j] > 0.0 {
            u_cols.push(b.col(j).iter().map(|x| x / norms[j]).collect());
        } else {
            u_cols.push(complete_orthonormal(&u_cols, m));
        }
    }
    let mut v_cols: Vec<Vec<f64>> = order.iter().map(|&j| v.col(j).to_vec()).collect();

    // Deterministic signs: largest-magnitude entry of each V column positive.
    for (uc, vc) in u_cols.iter_mut().zip(v_cols.iter_mut()) {
        let mut lead = 0;
        for (i, x) in vc.iter().enumerate() {
            if x.abs() > vc[lead].abs() {
                lead = i;
            }
        }
        if vc[lead] < 0.0 {
            for x in vc.iter_mut() {
                *x = -*x;
            }
            for x in uc.iter_mut() {
                *x = -*x;
            }
        }
    }

    Ok(SvdFactorization {
        u: from_columns(m, &u_cols),
        sigma,
        v: from_columns(n, &v_cols),
    })
}

/// A unit vector orthogonal to every column collected so far; used to fill
/// `U` columns whose singular value is exactly zero.
fn complete_orthonormal(existing: &[Vec<f64>], m: usize) -> Vec<f64> {
    for axis in 0..m {
        let mut cand = vec![0.0; m];
        cand[axis] = 1.0;
        for col in existing {
            let proj = super::dot(&cand, col);
            for (c, e) in cand.iter_mut().zip(col) {
                *c -= proj * e;
            }
        }
        let nrm = super::norm(&cand);
        if nrm > 0.5 {
            for c in cand.iter_mut() {
                *c /= nrm;
            }
            return cand;
        }
    }
    unreachable!("fewer than m orthonormal columns always leave room for one more");
}

fn from_columns(rows: usize, cols: &[Vec<f64>]) -> DenseMatrix {
    let n = cols.len();
    let mut entries = vec![0.0; rows * n];
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            entries[i * n + j] = x;
        }
    }
    DenseMatrix::new(rows, n, entries).expect("columns of a valid factorization are finite")
}
