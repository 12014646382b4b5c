use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{FeecError, Result};

/// One-sided gaps `δ(A,B)`, `δ(B,A)` and their maximum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubspaceGap {
    pub delta_ab: f64,
    pub delta_ba: f64,
    pub gap: f64,
}

/// Gap between the column spans of `a` and `b` in the inner product `m`
/// (Euclidean when `None`).
pub fn subspace_gap(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    m: Option<&DMatrix<f64>>,
) -> Result<SubspaceGap> {
    if a.nrows() != b.nrows() || m.is_some_and(|m| m.nrows() != a.nrows() || m.ncols() != a.nrows())
    {
        return Err(FeecError::DimensionMismatch(
            "subspace bases live in different spaces".into(),
        ));
    }
    let n = a.nrows();
    let m = m.cloned().unwrap_or_else(|| DMatrix::identity(n, n));
    let factor = m
        .clone()
        .cholesky()
        .ok_or_else(|| {
            FeecError::InvalidArgument("inner product matrix is not positive definite".into())
        })?
        .l();
    // With M = LLᵀ, the M-geometry of spans is the Euclidean geometry of
    // the spans of Lᵀa and Lᵀb.
    let qa = orthonormal(&(factor.transpose() * a), "A")?;
    let qb = orthonormal(&(factor.transpose() * b), "B")?;
    let delta_ab = one_sided(&qa, &qb);
    let delta_ba = one_sided(&qb, &qa);
    Ok(SubspaceGap {
        delta_ab,
        delta_ba,
        gap: delta_ab.max(delta_ba),
    })
}

fn orthonormal(a: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    if a.ncols() == 0 {
        return Ok(a.clone());
    }
    let svd = a.clone().svd(true, false);
    let (lo, hi) = (svd.singular_values.min(), svd.singular_values.max());
    if a.ncols() > a.nrows() || lo.is_nan() || lo <= 3e-7 * hi {
        return Err(FeecError::RankDeficient(format!(
            "columns of {name} are linearly dependent"
        )));
    }
    Ok(svd.u.expect("requested U"))
}

/// `max_{x ∈ A, ‖x‖=1} dist(x, B)` for orthonormal bases.
fn one_sided(qa: &DMatrix<f64>, qb: &DMatrix<f64>) -> f64 {
    if qa.ncols() == 0 {
        return 0.0;
    }
    let r = qa - qb * (qb.transpose() * qa);
    r.singular_values().max()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_rotation() {
        for &t in &[0.0, 0.3, 1.0, 2.5] {
            let a = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
            let b = DMatrix::from_column_slice(2, 1, &[f64::cos(t), f64::sin(t)]);
            let g = subspace_gap(&a, &b, None).unwrap();
            assert!((g.gap - f64::sin(t).abs()).abs() < 1e-14);
        }
    }

    #[test]
    fn identical_spans_have_zero_gap() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 1.0, 3.0, -1.0]);
        let b = &a * DMatrix::from_row_slice(2, 2, &[2.0, 1.0, -1.0, 3.0]);
        let g = subspace_gap(&a, &b, None).unwrap();
        assert!(g.gap < 1e-14);
    }

    #[test]
    fn full_dimensional_spans_have_zero_gap_both_ways() {
        let a = DMatrix::from_fn(16, 16, |i, j| {
            ((i * 7 + j * 3) % 11) as f64 - 5.0 + if i == j { 20.0 } else { 0.0 }
        });
        let b = DMatrix::from_fn(16, 16, |i, j| {
            ((i + 2 * j) % 5) as f64 + if i == j { 9.0 } else { 0.0 }
        });
        let g = subspace_gap(&a, &b, None).unwrap();
        assert!(g.delta_ab < 1e-13 && g.delta_ba < 1e-13, "{g:?}");
    }

    #[test]
    fn dependent_columns_are_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        let b = DMatrix::identity(2, 1);
        assert!(matches!(
            subspace_gap(&a, &b, None),
            Err(FeecError::RankDeficient(_))
        ));
    }
}
