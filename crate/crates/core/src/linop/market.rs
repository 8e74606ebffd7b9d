use std::fs;
use std::path::{Path, PathBuf};

use super::SparseMatrix;
use crate::error::{Error, Result};

/// Reads a coordinate-format real (or integer) Matrix Market file. General
/// and symmetric storage are accepted; symmetric files are expanded to full
/// storage. Duplicate coordinates are summed.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text, path.to_path_buf())
}

pub fn read_matrix_market_str(text: &str) -> Result<SparseMatrix> {
    parse(text, PathBuf::from("<string>"))
}

fn parse(text: &str, path: PathBuf) -> Result<SparseMatrix> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.clone(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (_, banner) = lines
        .next()
        .ok_or_else(|| err(1, "empty file, expected a %%MatrixMarket banner".into()))?;
    let words: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(err(1, "missing %%MatrixMarket banner".into()));
    }
    if words.len() != 5 || words[1] != "matrix" || words[2] != "coordinate" {
        return Err(err(1, format!("unsupported format '{}'", banner.trim())));
    }
    match words[3].as_str() {
        "real" | "integer" => {}
        other => return Err(err(1, format!("unsupported field qualifier '{other}'"))),
    }
    let symmetric = match words[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(err(1, format!("unsupported symmetry qualifier '{other}'"))),
    };

    let mut content = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_line, size) = content.next().ok_or_else(|| err(1, "missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| err(size_line, format!("bad size line: {e}")))?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(err(size_line, "size line must hold rows, cols, and entry count".into()));
    };
    if symmetric && rows != cols {
        return Err(err(size_line, "symmetric matrix must be square".into()));
    }

    let mut triplets = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    let mut seen = 0usize;
    for (line_no, line) in content {
        let mut tok = line.split_whitespace();
        let mut index = |name: &str, bound: usize| -> Result<usize> {
            let t = tok
                .next()
                .ok_or_else(|| err(line_no, format!("missing {name} index")))?;
            let v: usize = t
                .parse()
                .map_err(|_| err(line_no, format!("non-numeric {name} index '{t}'")))?;
            if v == 0 || v > bound {
                return Err(err(line_no, format!("{name} index {v} outside 1..={bound}")));
            }
            Ok(v - 1)
        };
        let i = index("row", rows)?;
        let j = index("column", cols)?;
        let t = tok.next().ok_or_else(|| err(line_no, "missing value".into()))?;
        let v: f64 = t
            .parse()
            .map_err(|_| err(line_no, format!("non-numeric value '{t}'")))?;
        if !v.is_finite() {
            return Err(err(line_no, format!("non-finite value '{t}'")));
        }
        if tok.next().is_some() {
            return Err(err(line_no, "trailing tokens after value".into()));
        }
        seen += 1;
        if seen > nnz {
            return Err(err(line_no, format!("more than the declared {nnz} entries")));
        }
        triplets.push((i, j, v));
        if symmetric && i != j {
            triplets.push((j, i, v));
        }
    }
    if seen != nnz {
        return Err(err(size_line, format!("declared {nnz} entries but found {seen}")));
    }
    SparseMatrix::from_triplets(rows, cols, &triplets)
}
