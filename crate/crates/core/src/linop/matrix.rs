use crate::error::{check_len, Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        check_len("dense matrix entries", rows * cols, entries.len())?;
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::Argument(format!(
                "dense matrix entry ({}, {}) is not finite",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(m * n);
        for row in rows {
            check_len("dense matrix row", n, row.len())?;
            entries.extend_from_slice(row);
        }
        Self::new(m, n, entries)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            entries,
        }
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut entries = vec![0.0; n * n];
        for (i, v) in d.iter().enumerate() {
            entries[i * n + i] = *v;
        }
        Self::new(n, n, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub(crate) fn mul_transpose_vec(&self, y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, yi) in y.iter().enumerate() {
            if *yi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
    }
}

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within a row and every stored value is finite and nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_len("csr row offsets", rows + 1, row_offsets.len())?;
        check_len("csr column indices", values.len(), col_indices.len())?;
        if row_offsets[0] != 0 || row_offsets[rows] != values.len() {
            return Err(Error::Argument(
                "csr row offsets must start at 0 and end at the number of values".into(),
            ));
        }
        for i in 0..rows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::Argument(format!("csr row offsets decrease at row {i}")));
            }
            let mut last = None;
            for k in lo..hi {
                let j = col_indices[k];
                if j >= cols {
                    return Err(Error::Argument(format!("column index {j} out of range in row {i}")));
                }
                if last.is_some_and(|l| l >= j) {
                    return Err(Error::Argument(format!(
                        "column indices not strictly increasing in row {i}"
                    )));
                }
                if !values[k].is_finite() || values[k] == 0.0 {
                    return Err(Error::Argument(format!(
                        "stored value at ({i}, {j}) must be finite and nonzero"
                    )));
                }
                last = Some(j);
            }
        }
        Ok(Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a CSR matrix from 0-based coordinate triplets. Duplicates are
    /// summed in input order; entries that sum to exactly zero are dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::Argument(format!(
                    "triplet ({i}, {j}) outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Argument(format!("triplet ({i}, {j}) is not finite")));
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        // stable, so duplicates accumulate in file order
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_offsets = vec![0usize; rows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut k = 0;
        while k < order.len() {
            let (i, j, _) = triplets[order[k]];
            let mut sum = 0.0;
            while k < order.len() && (triplets[order[k]].0, triplets[order[k]].1) == (i, j) {
                sum += triplets[order[k]].2;
                k += 1;
            }
            if sum != 0.0 {
                col_indices.push(j);
                values.push(sum);
                row_offsets[i + 1] += 1;
            }
        }
        for i in 0..rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self::new(rows, cols, row_offsets, col_indices, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates over stored entries as `(row, col, value)` in row order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let span = self.row_offsets[i]..self.row_offsets[i + 1];
            span.map(move |k| (i, self.col_indices[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut entries = vec![0.0; self.rows * self.cols];
        for (i, j, v) in self.iter() {
            entries[i * self.cols + j] = v;
        }
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub(crate) fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let span = self.row_offsets[i]..self.row_offsets[i + 1];
            *o = self.col_indices[span.clone()]
                .iter()
                .zip(&self.values[span])
                .map(|(&j, v)| v * x[j])
                .sum();
        }
    }

    /// Transposed traversal: scatters each row into the output.
    pub(crate) fn mul_transpose_vec(&self, y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, yi) in y.iter().enumerate() {
            let span = self.row_offsets[i]..self.row_offsets[i + 1];
            for (&j, v) in self.col_indices[span.clone()].iter().zip(&self.values[span]) {
                out[j] += v * yi;
            }
        }
    }
}
