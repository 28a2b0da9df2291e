//! Matrix Market coordinate-format I/O. Symmetric matrices are written with
//! lower-triangle storage and expanded on read.

use crate::error::{Error, Result};
use crate::sparsela::csr::CsrMatrix;
use num_complex::Complex64;
use std::io::{BufRead, Write};
use std::path::Path;

/// Write in coordinate format; symmetric matrices store the lower triangle
/// under the `symmetric` qualifier.
pub fn write_matrix_market(a: &CsrMatrix, path: &Path) -> Result<()> {
    let symmetric = a.is_symmetric();
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let kind = if symmetric { "symmetric" } else { "general" };
    writeln!(f, "%%MatrixMarket matrix coordinate real {kind}")?;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if !symmetric || j <= i {
                entries.push((i, j, v));
            }
        }
    }
    writeln!(f, "{} {} {}", a.nrows(), a.ncols(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(f, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn read_matrix_market(path: &Path) -> Result<CsrMatrix> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut lines = f.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Matrix Market file".into()))??;
    let lower = header.to_ascii_lowercase();
    if !lower.starts_with("%%matrixmarket matrix coordinate real") {
        return Err(Error::Parse(format!("unsupported Matrix Market header: {header}")));
    }
    let symmetric = lower.contains("symmetric");
    if !symmetric && !lower.contains("general") {
        return Err(Error::Parse(format!("unsupported qualifier in header: {header}")));
    }
    let mut size_line = None;
    for line in lines.by_ref() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some(trimmed.to_string());
        break;
    }
    let size_line = size_line.ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad size token {t}"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(Error::Parse(format!("bad size line: {size_line}")));
    }
    let (nrows, ncols, nnz) = (dims[0], dims[1], dims[2]);
    let mut triplets = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    let mut seen = 0usize;
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let i: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad entry line: {trimmed}")))?;
        let j: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad entry line: {trimmed}")))?;
        let v: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad entry line: {trimmed}")))?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(Error::Parse(format!("entry ({i},{j}) outside {nrows}x{ncols}")));
        }
        triplets.push((i - 1, j - 1, v));
        if symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::Parse(format!("expected {nnz} entries, found {seen}")));
    }
    CsrMatrix::from_triplets(nrows, ncols, triplets)
}

/// Spectrum CSV with columns `re,im`.
pub fn write_spectrum_csv(spectrum: &[Complex64], path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "re,im")?;
    for z in spectrum {
        writeln!(f, "{:.16e},{:.16e}", z.re, z.im)?;
    }
    Ok(())
}
