use std::sync::Arc;

use nalgebra::DMatrix;
use sprs::{CsMat, TriMat};

use super::CochainSpace;

/// Sparse matrix between two cochain spaces (CSR storage).
#[derive(Clone, Debug)]
pub struct SparseOperator {
    rows: Arc<CochainSpace>,
    cols: Arc<CochainSpace>,
    mat: CsMat<f64>,
}

impl SparseOperator {
    /// Assemble from `(row, col, value)` triplets; duplicates are summed in
    /// input order, so the result is reproducible.
    pub fn from_triplets(
        rows: Arc<CochainSpace>,
        cols: Arc<CochainSpace>,
        trip: &[(usize, usize, f64)],
    ) -> Self {
        let mut tri = TriMat::with_capacity((rows.dim(), cols.dim()), trip.len());
        for &(r, c, v) in trip {
            tri.add_triplet(r, c, v);
        }
        SparseOperator {
            mat: tri.to_csr(),
            rows,
            cols,
        }
    }

    pub fn row_space(&self) -> &Arc<CochainSpace> {
        &self.rows
    }

    pub fn col_space(&self) -> &Arc<CochainSpace> {
        &self.cols
    }

    pub fn nrows(&self) -> usize {
        self.mat.rows()
    }

    pub fn ncols(&self) -> usize {
        self.mat.cols()
    }

    pub fn matrix(&self) -> &CsMat<f64> {
        &self.mat
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols());
        let mut y = vec![0.0; self.nrows()];
        for (r, row) in self.mat.outer_iterator().enumerate() {
            y[r] = row.iter().map(|(c, &v)| v * x[c]).sum();
        }
        y
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows());
        let mut y = vec![0.0; self.ncols()];
        for (r, row) in self.mat.outer_iterator().enumerate() {
            for (c, &v) in row.iter() {
                y[c] += v * x[r];
            }
        }
        y
    }

    /// Nonzero entries in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.mat.nnz());
        for (r, row) in self.mat.outer_iterator().enumerate() {
            for (c, &v) in row.iter() {
                out.push((r, c, v));
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows(), self.ncols());
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.apply(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }
}
