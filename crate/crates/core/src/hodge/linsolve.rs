//! Direct solvers for the assembled saddle-point and shifted systems.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Side;
use nalgebra::{DMatrix, DVector};
use sprs::{CsMat, TriMat};

use crate::error::{FeecError, Result};

/// Below this many unknowns the dense LU path is used.
pub const DENSE_LIMIT: usize = 2000;

/// Square sparse matrix with duplicate-free CSR storage.
pub struct SparseSystem {
    pub mat: CsMat<f64>,
}

impl SparseSystem {
    pub fn from_triplets(n: usize, trip: &[(usize, usize, f64)]) -> Self {
        let mut tri = TriMat::with_capacity((n, n), trip.len());
        for &(r, c, v) in trip {
            tri.add_triplet(r, c, v);
        }
        SparseSystem { mat: tri.to_csr() }
    }

    pub fn n(&self) -> usize {
        self.mat.rows()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        for (r, row) in self.mat.outer_iterator().enumerate() {
            y[r] = row.iter().map(|(c, &v)| v * x[c]).sum();
        }
        y
    }

    fn faer_matrix(&self) -> Result<SparseColMat<usize, f64>> {
        let mut trip = Vec::with_capacity(self.mat.nnz());
        for (r, row) in self.mat.outer_iterator().enumerate() {
            for (c, &v) in row.iter() {
                trip.push(Triplet::new(r, c, v));
            }
        }
        SparseColMat::try_new_from_triplets(self.n(), self.n(), &trip)
            .map_err(|e| FeecError::Singular(format!("sparse matrix creation failed: {e:?}")))
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n(), self.n());
        for (r, row) in self.mat.outer_iterator().enumerate() {
            for (c, &v) in row.iter() {
                m[(r, c)] += v;
            }
        }
        m
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[allow(clippy::large_enum_variant)]
enum Factor {
    Dense(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    SparseLu(faer::sparse::linalg::solvers::Lu<usize, f64>),
    SparseLlt(faer::sparse::linalg::solvers::Llt<usize, f64>),
}

/// A factorized system that solves with iterative refinement.
pub struct Factorized<'a> {
    system: &'a SparseSystem,
    factor: Factor,
}

impl<'a> Factorized<'a> {
    /// General (indefinite) factorization: dense LU for small systems, sparse
    /// LU otherwise.
    pub fn lu(system: &'a SparseSystem) -> Result<Self> {
        let factor = if system.n() < DENSE_LIMIT {
            let lu = system.to_dense().lu();
            if !lu.is_invertible() {
                return Err(FeecError::Singular("dense LU found a zero pivot".into()));
            }
            Factor::Dense(lu)
        } else {
            let a = system.faer_matrix()?;
            Factor::SparseLu(
                a.sp_lu()
                    .map_err(|e| FeecError::Singular(format!("sparse LU failed: {e:?}")))?,
            )
        };
        Ok(Factorized { system, factor })
    }

    /// Sparse Cholesky for symmetric positive definite systems.
    pub fn cholesky(system: &'a SparseSystem) -> Result<Self> {
        let a = system.faer_matrix()?;
        let llt = a
            .sp_cholesky(Side::Lower)
            .map_err(|e| FeecError::Singular(format!("sparse Cholesky failed: {e:?}")))?;
        Ok(Factorized {
            system,
            factor: Factor::SparseLlt(llt),
        })
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.factor {
            Factor::Dense(lu) => lu
                .solve(&DVector::from_column_slice(b))
                .map(|x| x.as_slice().to_vec())
                .unwrap_or_else(|| vec![f64::NAN; b.len()]),
            Factor::SparseLu(lu) => {
                let mut rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
                lu.solve_in_place(rhs.as_mut());
                (0..b.len()).map(|i| rhs[(i, 0)]).collect()
            }
            Factor::SparseLlt(llt) => {
                let mut rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
                llt.solve_in_place(rhs.as_mut());
                (0..b.len()).map(|i| rhs[(i, 0)]).collect()
            }
        }
    }

    /// Solve `A x = b` with iterative refinement, returning the best iterate
    /// and its relative residual `‖b - A x‖ / ‖b‖`.
    pub fn refine(&self, b: &[f64], tol: f64) -> (Vec<f64>, f64) {
        let bn = norm(b);
        if bn == 0.0 {
            return (vec![0.0; b.len()], 0.0);
        }
        let mut x = self.raw_solve(b);
        let mut best = (x.clone(), f64::INFINITY);
        for _ in 0..8 {
            let ax = self.system.apply(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let rel = norm(&r) / bn;
            if !rel.is_finite() {
                break;
            }
            if rel < best.1 {
                best = (x.clone(), rel);
            } else {
                break;
            }
            if rel <= tol {
                break;
            }
            let dx = self.raw_solve(&r);
            x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
        }
        best
    }

    /// Like [`Factorized::refine`] but fails when the relative residual stays
    /// above `tol`.
    pub fn solve(&self, b: &[f64], tol: f64) -> Result<(Vec<f64>, f64)> {
        let (x, rel) = self.refine(b, tol);
        if rel.is_nan() || rel == f64::INFINITY {
            return Err(FeecError::Singular(
                "factorization produced non-finite values".into(),
            ));
        }
        if rel <= tol {
            Ok((x, rel))
        } else {
            Err(FeecError::SolveTolerance {
                residual: rel,
                tolerance: tol,
            })
        }
    }
}
