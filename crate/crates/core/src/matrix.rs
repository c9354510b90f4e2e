//! Design matrices: dense (column-major, backed by `nalgebra`) or sparse
//! compressed-sparse-column. Solvers only ever touch one column at a time,
//! so both layouts are column-oriented.

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    /// Builds from per-row `(column, value)` lists. Columns inside a row
    /// must be strictly increasing and `< ncols`.
    pub fn from_rows(nrows: usize, ncols: usize, rows: &[Vec<(usize, f64)>]) -> Self {
        assert_eq!(rows.len(), nrows);
        let mut counts = vec![0usize; ncols + 1];
        for row in rows {
            for &(j, _) in row {
                assert!(j < ncols, "column {j} out of range");
                counts[j + 1] += 1;
            }
        }
        for j in 0..ncols {
            counts[j + 1] += counts[j];
        }
        let col_ptr = counts.clone();
        let nnz = col_ptr[ncols];
        let mut next = counts;
        let mut row_idx = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        // rows visited in order, so row indices within a column come out sorted
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                let slot = next[j];
                row_idx[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[range.clone()], &self.values[range])
    }

    /// Row-wise view, used for serialization.
    pub fn to_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.nrows];
        for j in 0..self.ncols {
            let (idx, vals) = self.column(j);
            for (&i, &v) in idx.iter().zip(vals) {
                rows[i].push((j, v));
            }
        }
        rows
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for j in 0..self.ncols {
            let (idx, vals) = self.column(j);
            for (&i, &v) in idx.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Design {
    Dense(DMatrix<f64>),
    Sparse(CscMatrix),
}

impl Design {
    pub fn nrows(&self) -> usize {
        match self {
            Design::Dense(m) => m.nrows(),
            Design::Sparse(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Design::Dense(m) => m.ncols(),
            Design::Sparse(m) => m.ncols(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Design::Sparse(_))
    }

    #[inline]
    fn dense_col(m: &DMatrix<f64>, j: usize) -> &[f64] {
        let n = m.nrows();
        &m.as_slice()[j * n..(j + 1) * n]
    }

    /// `<column j, w>`.
    #[inline]
    pub fn col_dot(&self, j: usize, w: &[f64]) -> f64 {
        match self {
            Design::Dense(m) => Self::dense_col(m, j)
                .iter()
                .zip(w)
                .map(|(a, b)| a * b)
                .sum(),
            Design::Sparse(m) => {
                let (idx, vals) = m.column(j);
                idx.iter().zip(vals).map(|(&i, v)| v * w[i]).sum()
            }
        }
    }

    /// `out += alpha * column j`.
    #[inline]
    pub fn col_axpy(&self, j: usize, alpha: f64, out: &mut [f64]) {
        match self {
            Design::Dense(m) => {
                for (o, a) in out.iter_mut().zip(Self::dense_col(m, j)) {
                    *o += alpha * a;
                }
            }
            Design::Sparse(m) => {
                let (idx, vals) = m.column(j);
                for (&i, v) in idx.iter().zip(vals) {
                    out[i] += alpha * v;
                }
            }
        }
    }

    /// `out += alpha * (labels ⊙ column j)`.
    #[inline]
    pub fn col_axpy_scaled(&self, j: usize, alpha: f64, scale: &[f64], out: &mut [f64]) {
        match self {
            Design::Dense(m) => {
                for ((o, a), s) in out.iter_mut().zip(Self::dense_col(m, j)).zip(scale) {
                    *o += alpha * a * s;
                }
            }
            Design::Sparse(m) => {
                let (idx, vals) = m.column(j);
                for (&i, v) in idx.iter().zip(vals) {
                    out[i] += alpha * v * scale[i];
                }
            }
        }
    }

    pub fn col_sq_norm(&self, j: usize) -> f64 {
        match self {
            Design::Dense(m) => Self::dense_col(m, j).iter().map(|a| a * a).sum(),
            Design::Sparse(m) => m.column(j).1.iter().map(|a| a * a).sum(),
        }
    }

    /// `X beta`.
    pub fn mul_vec(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows()];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                self.col_axpy(j, b, &mut out);
            }
        }
        out
    }

    /// `X^T w`.
    pub fn tr_mul_vec(&self, w: &[f64]) -> Vec<f64> {
        (0..self.ncols()).map(|j| self.col_dot(j, w)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Design::Dense(m) => m.clone(),
            Design::Sparse(m) => m.to_dense(),
        }
    }

    /// Row-wise `(column, value)` lists. Dense rows list every column.
    pub fn to_rows(&self) -> Vec<Vec<(usize, f64)>> {
        match self {
            Design::Dense(m) => (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| (j, m[(i, j)])).collect())
                .collect(),
            Design::Sparse(m) => m.to_rows(),
        }
    }
}
