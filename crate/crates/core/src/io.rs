//! Text formats for matrices, vectors, and CSV scalars.
//!
//! Matrix files: first line `m n`, then `m` lines of `n` whitespace-separated
//! decimal scalars. Vector files: first line `n`, then one scalar per line.
//! Scalars everywhere are written with 17 significant digits, which is enough
//! for binary64 values to round-trip losslessly, so a generated file read
//! back reproduces the original bits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Formats a scalar with 17 significant digits (lossless binary64 round trip).
pub fn fmt_scalar(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_matrix<W: Write + ?Sized>(w: &mut W, a: &DenseMatrix) -> std::io::Result<()> {
    writeln!(w, "{} {}", a.rows(), a.cols())?;
    for i in 0..a.rows() {
        let line: Vec<String> = a.row(i).iter().map(|&x| fmt_scalar(x)).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_vector<W: Write + ?Sized>(w: &mut W, v: &[f64]) -> std::io::Result<()> {
    writeln!(w, "{}", v.len())?;
    for &x in v {
        writeln!(w, "{}", fmt_scalar(x))?;
    }
    Ok(())
}

pub fn read_matrix<R: BufRead>(r: R) -> Result<DenseMatrix> {
    let mut lines = r.lines().enumerate();
    let (rows, cols) = {
        let (idx, line) = next_content_line(&mut lines)?;
        let mut parts = line.split_whitespace();
        let rows = parse_field::<usize>(parts.next(), idx, "row count")?;
        let cols = parse_field::<usize>(parts.next(), idx, "column count")?;
        if parts.next().is_some() {
            return Err(Error::Parse {
                line: idx + 1,
                msg: "expected exactly two fields `m n` on the header line".into(),
            });
        }
        (rows, cols)
    };

    let mut entries = Vec::with_capacity(rows.saturating_mul(cols));
    for _ in 0..rows {
        let (idx, line) = next_content_line(&mut lines)?;
        let start = entries.len();
        for field in line.split_whitespace() {
            entries.push(parse_field::<f64>(Some(field), idx, "matrix entry")?);
        }
        if entries.len() - start != cols {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected {cols} entries, got {}", entries.len() - start),
            });
        }
    }
    DenseMatrix::new(rows, cols, entries)
}

pub fn read_vector<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let mut lines = r.lines().enumerate();
    let (idx, line) = next_content_line(&mut lines)?;
    let len = parse_field::<usize>(Some(line.trim()), idx, "vector length")?;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let (idx, line) = next_content_line(&mut lines)?;
        let x = parse_field::<f64>(Some(line.trim()), idx, "vector entry")?;
        if !x.is_finite() {
            return Err(Error::Parse {
                line: idx + 1,
                msg: "vector entry is not finite".into(),
            });
        }
        out.push(x);
    }
    Ok(out)
}

pub fn load_matrix(path: &Path) -> Result<DenseMatrix> {
    read_matrix(BufReader::new(File::open(path)?))
}

pub fn load_vector(path: &Path) -> Result<Vec<f64>> {
    read_vector(BufReader::new(File::open(path)?))
}

pub fn save_matrix(path: &Path, a: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix(&mut w, a)?;
    w.flush()?;
    Ok(())
}

pub fn save_vector(path: &Path, v: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vector(&mut w, v)?;
    w.flush()?;
    Ok(())
}

type NumberedLines<'a, R> = std::iter::Enumerate<std::io::Lines<R>>;

fn next_content_line<R: BufRead>(lines: &mut NumberedLines<'_, R>) -> Result<(usize, String)> {
    for (idx, line) in lines {
        let line = line?;
        if !line.trim().is_empty() {
            return Ok((idx, line));
        }
    }
    Err(Error::Parse {
        line: 0,
        msg: "unexpected end of file".into(),
    })
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    line_idx: usize,
    what: &str,
) -> Result<T> {
    let field = field.ok_or_else(|| Error::Parse {
        line: line_idx + 1,
        msg: format!("missing {what}"),
    })?;
    field.parse().map_err(|_| Error::Parse {
        line: line_idx + 1,
        msg: format!("invalid {what} `{field}`"),
    })
}
