//! On-disk formats: matrix files, report and kernel CSVs.
//!
//! Matrix file: a header line `MODMAT 1 <dim> <digits> <sha256>` followed by
//! `dim` lines of space-separated entries in row-major order. Entries are
//! exact decimal renderings that parse back to the same binary value; the
//! hash covers every byte after the header line.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rug::Float;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::discretize::BoxBasis;
use crate::highprec::{format_exact, format_sig, PrecisionContext};
use crate::linalg::SymMatrix;
use crate::probes::SmearReport;

/// Significant digits written to CSV files.
pub const CSV_DIGITS: usize = 30;

const MAGIC: &str = "MODMAT";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed matrix file: {0}")]
    Format(String),
    #[error("matrix file checksum mismatch")]
    Checksum,
}

fn fs_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Fs {
        path: path.display().to_string(),
        source,
    }
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn encode_matrix(m: &SymMatrix, digits: u32) -> String {
    let n = m.dim();
    let mut body = String::new();
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                body.push(' ');
            }
            body.push_str(&format_exact(m.get(i, j)));
        }
        body.push('\n');
    }
    format!("{MAGIC} {VERSION} {n} {digits} {}\n{body}", sha_hex(body.as_bytes()))
}

/// Parses a matrix file; returns the matrix and the digits it was stored at.
pub fn decode_matrix(text: &str) -> Result<(SymMatrix, u32), IoError> {
    let (header, body) = text
        .split_once('\n')
        .ok_or_else(|| IoError::Format("missing header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [magic, version, dim, digits, sha] = fields.as_slice() else {
        return Err(IoError::Format(format!("bad header {header:?}")));
    };
    if *magic != MAGIC || version.parse::<u32>().ok() != Some(VERSION) {
        return Err(IoError::Format(format!("unsupported header {header:?}")));
    }
    let dim: usize = dim.parse().map_err(|_| IoError::Format("bad dimension".into()))?;
    let digits: u32 = digits.parse().map_err(|_| IoError::Format("bad digits".into()))?;
    if sha_hex(body.as_bytes()) != *sha {
        return Err(IoError::Checksum);
    }
    let ctx = PrecisionContext::new(digits).map_err(|e| IoError::Format(e.to_string()))?;
    let rows: Vec<&str> = body.lines().collect();
    if rows.len() != dim {
        return Err(IoError::Format(format!("expected {dim} rows, found {}", rows.len())));
    }
    let mut dense = Vec::with_capacity(dim * dim);
    for row in rows {
        let before = dense.len();
        for tok in row.split_whitespace() {
            let v = Float::parse(tok).map_err(|_| IoError::Format(format!("bad entry {tok:?}")))?;
            dense.push(Float::with_val(ctx.bits(), v));
        }
        if dense.len() - before != dim {
            return Err(IoError::Format("row length does not match dimension".into()));
        }
    }
    for i in 0..dim {
        for j in 0..i {
            if dense[i * dim + j] != dense[j * dim + i] {
                return Err(IoError::Format(format!("entry ({i}, {j}) breaks symmetry")));
            }
        }
    }
    let m = SymMatrix::from_fn(dim, ctx.bits(), |i, j| dense[i * dim + j].clone());
    Ok((m, digits))
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(fs_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fs_err(dir))?;
    tmp.write_all(contents).map_err(fs_err(path))?;
    tmp.persist(path).map_err(|e| IoError::Fs {
        path: path.display().to_string(),
        source: e.error,
    })?;
    Ok(())
}

pub fn write_matrix(path: &Path, m: &SymMatrix, digits: u32) -> Result<(), IoError> {
    write_atomic(path, encode_matrix(m, digits).as_bytes())
}

pub fn read_matrix(path: &Path) -> Result<(SymMatrix, u32), IoError> {
    let text = fs::read_to_string(path).map_err(fs_err(path))?;
    decode_matrix(&text)
}

/// `mu,value,ref_*,err_*` with only the reference columns that apply.
/// Relative errors against a vanishing reference are left empty.
pub fn report_csv(report: &SmearReport) -> String {
    let mut s = String::from("mu,value");
    for k in &report.kinds {
        let _ = write!(s, ",ref_{}", k.column());
    }
    for k in &report.kinds {
        let _ = write!(s, ",err_{}", k.column());
    }
    s.push('\n');
    for row in &report.rows {
        let _ = write!(s, "{},{}", format_sig(&row.mu, CSV_DIGITS), format_sig(&row.value, CSV_DIGITS));
        for k in &report.kinds {
            s.push(',');
            if let Some(r) = row.reference(*k) {
                s.push_str(&format_sig(r, CSV_DIGITS));
            }
        }
        for k in &report.kinds {
            s.push(',');
            if let Some(e) = row.rel_error(*k) {
                s.push_str(&format_sig(e, CSV_DIGITS));
            }
        }
        s.push('\n');
    }
    s
}

/// `i,j,x_i,y_j,value` over all cell pairs, at cell midpoints.
pub fn kernel_csv(basis: &BoxBasis, kernel: &SymMatrix) -> String {
    let n = kernel.dim();
    let mids: Vec<String> = (0..n)
        .map(|i| format_sig(&basis.grid.midpoint(i), CSV_DIGITS))
        .collect();
    let mut s = String::from("i,j,x_i,y_j,value\n");
    for i in 0..n {
        for j in 0..n {
            let _ = writeln!(
                s,
                "{i},{j},{},{},{}",
                mids[i],
                mids[j],
                format_sig(kernel.get(i, j), CSV_DIGITS)
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (SymMatrix, PrecisionContext) {
        let ctx = PrecisionContext::new(40).unwrap();
        let m = SymMatrix::from_fn(3, ctx.bits(), |i, j| {
            ctx.scalar(1) / ctx.scalar(3 + i + 2 * j) - ctx.scalar(i * j) / 7u32
        });
        (m, ctx)
    }

    #[test]
    fn matrix_round_trip_is_exact() {
        let (m, ctx) = sample();
        let text = encode_matrix(&m, ctx.digits());
        let (back, digits) = decode_matrix(&text).unwrap();
        assert_eq!(digits, 40);
        assert_eq!(back, m);
        assert_eq!(encode_matrix(&back, digits), text);
    }

    #[test]
    fn tampering_is_detected() {
        let (m, ctx) = sample();
        let text = encode_matrix(&m, ctx.digits());
        let bad = text.replacen("e-1", "e-2", 1);
        assert!(matches!(decode_matrix(&bad), Err(IoError::Checksum)));
        assert!(matches!(decode_matrix("MODMAT 2 3 40 abc\n"), Err(IoError::Format(_))));
    }
}
