//! Coordinate-sparse real matrices.
//!
//! One matrix type backs every operator in the crate: the structural
//! matrices of static graphs, the dense modularity matrix, and the
//! space-time propagation blocks. Storage is coordinate triplets with a
//! compressed-row view built on construction for matrix-vector products.

use crate::error::{Error, Result};

/// What a matrix represents. Carried for provenance; no behavior depends on it
/// except dense/degenerate handling in callers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixRole {
    Adjacency,
    Degree,
    Incidence,
    Kirchhoff,
    Laplacian,
    AsymLaplacian,
    ModularityDense,
    SpaceTime,
}

impl MatrixRole {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixRole::Adjacency => "adjacency",
            MatrixRole::Degree => "degree",
            MatrixRole::Incidence => "incidence",
            MatrixRole::Kirchhoff => "kirchhoff",
            MatrixRole::Laplacian => "laplacian",
            MatrixRole::AsymLaplacian => "asym-laplacian",
            MatrixRole::ModularityDense => "modularity-dense",
            MatrixRole::SpaceTime => "space-time",
        }
    }
}

/// Sparse real matrix in coordinate form with a CSR view for products.
///
/// Invariants: all indices within `rows` x `cols`; no duplicate (row, col)
/// pairs. Construction rejects violations.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    role: MatrixRole,
    // CSR: entries sorted by (row, col).
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Build from coordinate triplets. Rejects out-of-bounds indices and
    /// duplicate coordinates.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
        role: MatrixRole,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::EntryOutOfBounds {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
            entries.push((r, c, v));
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::DuplicateEntry {
                    row: w[0].0,
                    col: w[0].1,
                });
            }
        }
        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = entries.iter().map(|&(_, c, _)| c).collect();
        let values = entries.iter().map(|&(_, _, v)| v).collect();
        Ok(SparseMatrix {
            rows,
            cols,
            role,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Like `from_triplets` but sums values at repeated coordinates instead of
    /// rejecting them. Used where operators accumulate (space-time blocks).
    pub fn from_triplets_summing(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
        role: MatrixRole,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::EntryOutOfBounds {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
            entries.push((r, c, v));
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        Self::from_triplets(rows, cols, merged, role)
    }

    pub fn zeros(rows: usize, cols: usize, role: MatrixRole) -> Self {
        SparseMatrix {
            rows,
            cols,
            role,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn role(&self) -> MatrixRole {
        self.role
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries in (row, col, value) order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |i| (r, self.col_idx[i], self.values[i]))
        })
    }

    /// Entry at (r, c); zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.col_idx[lo..hi].binary_search(&c) {
            Ok(i) => self.values[lo + i],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[i] * x[self.col_idx[i]];
            }
            *out = acc;
        }
    }

    pub fn matvec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec(x, &mut y);
        y
    }

    pub fn transpose(&self) -> SparseMatrix {
        let trips: Vec<_> = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        SparseMatrix::from_triplets(self.cols, self.rows, trips, self.role)
            .expect("transpose of a valid matrix is valid")
    }

    /// Maximum |A - A^T| over all coordinates; 0 for symmetric matrices.
    pub fn max_asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut worst: f64 = 0.0;
        for (r, c, v) in self.triplets() {
            worst = worst.max((v - t.get(r, c)).abs());
        }
        for (r, c, v) in t.triplets() {
            worst = worst.max((v - self.get(r, c)).abs());
        }
        worst
    }

    /// Infinity norm: maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| {
                self.values[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Dense row-major copy. Intended for small systems and oracles.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    /// A * B as dense, for small test-sized matrices.
    pub fn dense_product(&self, other: &SparseMatrix) -> Vec<Vec<f64>> {
        assert_eq!(self.cols, other.rows);
        let mut out = vec![vec![0.0; other.cols]; self.rows];
        for (r, k, v) in self.triplets() {
            for i in other.row_ptr[k]..other.row_ptr[k + 1] {
                out[r][other.col_idx[i]] += v * other.values[i];
            }
        }
        out
    }
}
