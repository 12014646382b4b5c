use sprs::{CsMat, TriMat};

use crate::derham::SparseOperator;

pub(crate) fn transpose(a: &CsMat<f64>) -> CsMat<f64> {
    a.transpose_view().to_csr()
}

pub(crate) fn product(a: &CsMat<f64>, b: &CsMat<f64>) -> CsMat<f64> {
    a * b
}

pub(crate) fn sum(a: &CsMat<f64>, b: &CsMat<f64>) -> CsMat<f64> {
    a + b
}

pub(crate) fn diagonal(values: &[f64]) -> CsMat<f64> {
    let n = values.len();
    let mut tri = TriMat::with_capacity((n, n), n);
    for (i, &v) in values.iter().enumerate() {
        tri.add_triplet(i, i, v);
    }
    tri.to_csr()
}

pub(crate) fn diag_of(a: &SparseOperator) -> Vec<f64> {
    let m = a.matrix();
    (0..m.rows())
        .map(|i| m.get(i, i).copied().unwrap_or(0.0))
        .collect()
}

pub(crate) fn apply(a: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.rows()];
    for (r, row) in a.outer_iterator().enumerate() {
        y[r] = row.iter().map(|(c, &v)| v * x[c]).sum();
    }
    y
}

/// Row-major `(row, col, value)` triplets shifted by the given offsets.
pub(crate) fn shifted_triplets(
    a: &CsMat<f64>,
    r0: usize,
    c0: usize,
    out: &mut Vec<(usize, usize, f64)>,
) {
    for (r, row) in a.outer_iterator().enumerate() {
        for (c, &v) in row.iter() {
            out.push((r0 + r, c0 + c, v));
        }
    }
}
