//! Dense matrix and vector kernels.
//!
//! Everything is plain row-major `f64` storage: the solver touches one row
//! per step, so rows must be contiguous slices. No attempt is made at BLAS
//! performance; accuracy and a fixed summation order matter more here, since
//! traces are compared bit-for-bit and `matvec` is itself used as a test
//! oracle target.

mod svd;

pub use svd::{svd, SvdFactorization};

use crate::error::{Error, Result};

/// Relative threshold on `sigma_n / sigma_1` below which a matrix is treated
/// as rank deficient for solver use.
pub const RANK_TOL: f64 = 1e-12;

/// Row-major dense matrix with at least one row and one column, all entries
/// finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    /// Validates shape and finiteness and takes ownership of the entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<DenseMatrix> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension {
                context: "matrix entries",
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        if let Some(k) = entries.iter().position(|e| !e.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(DenseMatrix {
            rows,
            cols,
            entries,
        })
    }

    /// Builds from row slices; rows must be nonempty and of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<DenseMatrix> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::Dimension {
                    context: "matrix row",
                    expected: n,
                    actual: rows[i].len(),
                });
            }
        }
        DenseMatrix::new(m, n, rows.concat())
    }

    pub fn identity(n: usize) -> DenseMatrix {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        DenseMatrix {
            rows: n,
            cols: n,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.entries[i * self.cols + j]
    }

    /// Row `i` as a contiguous slice.
    pub fn row(&self, i: usize) -> &[f64] {
        debug_assert!(i < self.rows);
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Sum of squared entries, accumulated in row-major order.
///
/// Equals the sum of squared row norms and, through the SVD, the sum of
/// squared singular values.
pub fn frobenius_norm_sq(a: &DenseMatrix) -> f64 {
    a.entries.iter().map(|e| e * e).sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(v: &[f64]) -> f64 {
    dot(v, v)
}

pub fn norm(v: &[f64]) -> f64 {
    norm_sq(v).sqrt()
}

/// `a * x`, each component summed left to right over the row.
pub fn matvec(a: &DenseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.cols() {
        return Err(Error::Dimension {
            context: "matvec operand",
            expected: a.cols(),
            actual: x.len(),
        });
    }
    Ok((0..a.rows()).map(|i| dot(a.row(i), x)).collect())
}

/// `||a x - b||_2`; dimensions must already agree.
pub fn residual_norm(a: &DenseMatrix, b: &[f64], x: &[f64]) -> f64 {
    debug_assert_eq!(b.len(), a.rows());
    debug_assert_eq!(x.len(), a.cols());
    (0..a.rows())
        .map(|i| {
            let r = dot(a.row(i), x) - b[i];
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// `||A x|| / ||x||`, the quantity driven toward `sigma_n` by solving
/// `A x = 0`. Errors on the zero vector.
pub fn rayleigh_quotient(a: &DenseMatrix, x: &[f64]) -> Result<f64> {
    if x.len() != a.cols() {
        return Err(Error::Dimension {
            context: "rayleigh quotient operand",
            expected: a.cols(),
            actual: x.len(),
        });
    }
    let nx = norm(x);
    if nx == 0.0 {
        return Err(Error::ZeroVector);
    }
    let ax = matvec(a, x)?;
    Ok(norm(&ax) / nx)
}
