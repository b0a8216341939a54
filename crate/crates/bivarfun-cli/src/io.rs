//! Matrix file I/O in the cmx text format: a header line `cmx <rows> <cols>`
//! followed by rows*cols data lines `<re> <im>` in column-major order. Values
//! are printed with 17 significant digits, so doubles survive a round trip
//! bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bivarfun::{ComplexMatrix, Error, Result};
use num_complex::Complex64;

pub fn format_cmx(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "cmx {} {}", m.rows(), m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let v = m[(i, j)];
            let _ = writeln!(out, "{:.16e} {:.16e}", v.re, v.im);
        }
    }
    out
}

pub fn write_cmx(path: &Path, m: &ComplexMatrix) -> Result<()> {
    fs::write(path, format_cmx(m))
        .map_err(|e| Error::arg("write_cmx", format!("{}: {e}", path.display())))
}

pub fn parse_cmx(text: &str) -> Result<ComplexMatrix> {
    let bad = |reason: String| Error::arg("parse_cmx", reason);
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("cmx") {
        return Err(bad(format!("bad header {header:?}, expected `cmx <rows> <cols>`")));
    }
    let mut dim = |what: &str| -> Result<usize> {
        parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(format!("header is missing a valid {what} count")))
    };
    let rows = dim("row")?;
    let cols = dim("column")?;
    if parts.next().is_some() {
        return Err(bad("trailing tokens after the header dimensions".into()));
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| bad(format!("expected {} entries, file ends early", rows * cols)))?;
            let mut it = line.split_whitespace();
            let mut num = |part: &str| -> Result<f64> {
                it.next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| bad(format!("entry ({i},{j}): bad {part} in {line:?}")))
            };
            let re = num("real part")?;
            let im = num("imaginary part")?;
            if it.next().is_some() {
                return Err(bad(format!("entry ({i},{j}): trailing tokens in {line:?}")));
            }
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    if lines.next().is_some() {
        return Err(bad(format!("trailing lines after {} entries", rows * cols)));
    }
    Ok(m)
}

pub fn read_cmx(path: &Path) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::arg("read_cmx", format!("{}: {e}", path.display())))?;
    parse_cmx(&text)
}
