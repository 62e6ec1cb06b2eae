//! Matrix ingestion: Matrix Market coordinate files for sparse symmetric
//! matrices, comma-separated values for dense ones.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

use ccd_core::models::sparse::CsrMatrix;

#[derive(Debug, Error)]
pub enum MatIoError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("header must be '%%MatrixMarket matrix coordinate real symmetric', got '{0}'")]
    BadHeader(String),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {n} exceeds the supported limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("model error: {0}")]
    Model(String),
}

/// Upper bound on ingested matrix dimension; keeps dense cross-checks and
/// accidental huge files in check.
pub const MAX_DIM: usize = 100_000;

/// Read a symmetric real coordinate Matrix Market file into CSR form.
pub fn read_matrix_market(path: &Path) -> Result<(CsrMatrix, usize), MatIoError> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| MatIoError::Parse {
            line: 1,
            msg: "empty file".into(),
        })
        .and_then(|(i, l)| Ok((i, l?)))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5
        || fields[0] != "%%MatrixMarket"
        || fields[1] != "matrix"
        || fields[2] != "coordinate"
        || fields[3] != "real"
        || fields[4] != "symmetric"
    {
        return Err(MatIoError::BadHeader(header));
    }

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        if dims.is_none() {
            let rows: usize = parse_field(&mut parts, line_no, "rows")?;
            let cols: usize = parse_field(&mut parts, line_no, "cols")?;
            let nnz: usize = parse_field(&mut parts, line_no, "nnz")?;
            if rows != cols {
                return Err(MatIoError::NotSquare { rows, cols });
            }
            if rows > MAX_DIM {
                return Err(MatIoError::TooLarge {
                    n: rows,
                    limit: MAX_DIM,
                });
            }
            dims = Some((rows, cols, nnz));
            triplets.reserve(nnz);
            continue;
        }
        let i: usize = parse_field(&mut parts, line_no, "row index")?;
        let j: usize = parse_field(&mut parts, line_no, "col index")?;
        let v: f64 = parse_field(&mut parts, line_no, "value")?;
        let (n, _, _) = dims.unwrap();
        if i == 0 || j == 0 || i > n || j > n {
            return Err(MatIoError::Parse {
                line: line_no,
                msg: format!("index ({i}, {j}) out of 1..{n}"),
            });
        }
        triplets.push((i - 1, j - 1, v));
    }
    let (n, _, nnz) = dims.ok_or(MatIoError::Parse {
        line: 0,
        msg: "missing dimension line".into(),
    })?;
    if triplets.len() != nnz {
        return Err(MatIoError::Parse {
            line: 0,
            msg: format!("expected {nnz} entries, found {}", triplets.len()),
        });
    }
    let csr = CsrMatrix::from_symmetric_triplets(n, &triplets)
        .map_err(|e| MatIoError::Model(e.to_string()))?;
    Ok((csr, n))
}

fn parse_field<'a, T: std::str::FromStr>(
    parts: &mut impl Iterator<Item = &'a str>,
    line: usize,
    what: &str,
) -> Result<T, MatIoError> {
    let tok = parts.next().ok_or_else(|| MatIoError::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| MatIoError::Parse {
        line,
        msg: format!("cannot parse {what} from '{tok}'"),
    })
}

/// Read a dense matrix from comma-separated rows.
pub fn read_dense_csv(path: &Path) -> Result<(Vec<f64>, usize, usize), MatIoError> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row: Result<Vec<f64>, _> = trimmed
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect();
        let row = row.map_err(|e| MatIoError::Parse {
            line: idx + 1,
            msg: e.to_string(),
        })?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(MatIoError::Parse {
                    line: idx + 1,
                    msg: format!("row has {} fields, expected {c}", row.len()),
                })
            }
            _ => {}
        }
        data.extend(row);
        rows += 1;
    }
    Ok((data, rows, cols.unwrap_or(0)))
}
