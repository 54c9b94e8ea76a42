//! MatrixMarket coordinate-format reader and writer.
//!
//! Only `matrix coordinate real general` files are handled, with 1-based
//! indices. Values are printed with 17 significant digits so that a write
//! followed by a read reproduces every `f64` bit-exactly. Duplicate entries
//! are summed on read, per the format convention.

use super::CsrMatrix;
use crate::error::{Error, Result};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub fn write_matrix_market(m: &CsrMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for r in 0..m.nrows() {
        for (c, v) in m.row(r) {
            writeln!(w, "{} {} {:.16e}", r + 1, c + 1, v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_market(path: &Path) -> Result<CsrMatrix> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();

    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))??;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() < 5
        || !tokens[0].starts_with("%%matrixmarket")
        || tokens[1] != "matrix"
        || tokens[2] != "coordinate"
        || tokens[3] != "real"
        || tokens[4] != "general"
    {
        return Err(Error::Format(format!("unsupported header: {header}")));
    }

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        if dims.is_none() {
            let nrows = parse(parts.next(), "row count")?;
            let ncols = parse(parts.next(), "column count")?;
            let nnz = parse(parts.next(), "entry count")?;
            dims = Some((nrows, ncols, nnz));
            continue;
        }
        let (nrows, ncols, _) = dims.unwrap();
        let r: usize = parse(parts.next(), "row index")?;
        let c: usize = parse(parts.next(), "column index")?;
        let v: f64 = parse(parts.next(), "value")?;
        if r == 0 || c == 0 || r > nrows || c > ncols {
            return Err(Error::Format(format!("index ({r}, {c}) out of bounds")));
        }
        triplets.push((r - 1, c - 1, v));
    }

    let (nrows, ncols, nnz) = dims.ok_or_else(|| Error::Format("missing size line".into()))?;
    if triplets.len() != nnz {
        return Err(Error::Format(format!(
            "declared {} entries, found {}",
            nnz,
            triplets.len()
        )));
    }
    Ok(CsrMatrix::from_triplets(nrows, ncols, &triplets))
}

fn parse<T: std::str::FromStr>(token: Option<&str>, what: &str) -> Result<T> {
    token
        .ok_or_else(|| Error::Format(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Format(format!("cannot parse {what}")))
}
