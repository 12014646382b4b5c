use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sprs::CsMat;

use super::linsolve::{Factorized, SparseSystem};
use super::sparse;
use crate::derham::{CochainSpace, CochainVec, DiscreteComplex};
use crate::error::{FeecError, Result};

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_TOL: f64 = 1e-9;

/// Spaces up to this size use the dense SVD route.
pub const DENSE_HARMONIC_LIMIT: usize = 600;

const ZERO_EIG: f64 = 1e-4;
const SPARSE_SHIFT: f64 = 1e-6;
/// Seed of the sparse route's starting block unless the complex sets one.
pub const DEFAULT_SEED: u64 = 0x4a52_6d6f;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HarmonicRoute {
    Auto,
    Dense,
    Sparse,
}

/// `M_k`-orthonormal basis of the discrete harmonic forms.
#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    space: Arc<CochainSpace>,
    q: DMatrix<f64>,
}

impl HarmonicBasis {
    pub fn space(&self) -> &Arc<CochainSpace> {
        &self.space
    }

    pub fn degree(&self) -> usize {
        self.space.degree()
    }

    pub fn dim(&self) -> usize {
        self.q.ncols()
    }

    /// Basis cochains as columns.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn member(&self, i: usize) -> CochainVec {
        CochainVec::new(
            self.space.clone(),
            self.q.column(i).iter().copied().collect(),
        )
        .expect("matching length")
    }

    /// `Σ_i c_i q_i`.
    pub fn combine(&self, c: &[f64]) -> Vec<f64> {
        (&self.q * DVector::from_column_slice(c))
            .as_slice()
            .to_vec()
    }

    /// `Qᵀ y` for a covector `y` (typically `M_k v`).
    pub fn dual_coefficients(&self, y: &[f64]) -> Vec<f64> {
        (self.q.transpose() * DVector::from_column_slice(y))
            .as_slice()
            .to_vec()
    }
}

/// Cached harmonic basis of degree `k`.
pub fn harmonic_basis(cx: &DiscreteComplex, k: usize) -> Result<Arc<HarmonicBasis>> {
    cx.space(k)?;
    if let Some(h) = cx.harmonic[k].get() {
        return Ok(h.clone());
    }
    let h = Arc::new(harmonic_basis_with(cx, k, HarmonicRoute::Auto)?);
    Ok(cx.harmonic[k].get_or_init(|| h).clone())
}

/// Uncached computation with an explicit route.
pub fn harmonic_basis_with(
    cx: &DiscreteComplex,
    k: usize,
    route: HarmonicRoute,
) -> Result<HarmonicBasis> {
    let space = cx.space(k)?;
    let nk = space.dim();
    let mass = cx.mass(k)?;
    let null = if nk == 0 {
        DMatrix::zeros(0, 0)
    } else {
        let dense = match route {
            HarmonicRoute::Auto => nk <= DENSE_HARMONIC_LIMIT,
            HarmonicRoute::Dense => true,
            HarmonicRoute::Sparse => false,
        };
        if dense {
            dense_null_space(cx, k)?
        } else {
            sparse_null_space(cx, k)?
        }
    };
    let q = if null.ncols() == 0 {
        DMatrix::zeros(nk, 0)
    } else {
        orthonormalize(&null, mass.matrix())?
    };
    Ok(HarmonicBasis { space, q })
}

fn dense_null_space(cx: &DiscreteComplex, k: usize) -> Result<DMatrix<f64>> {
    let n = cx.dim();
    let nk = cx.space(k)?.dim();
    let mut blocks: Vec<DMatrix<f64>> = Vec::new();
    if k < n {
        blocks.push(cx.d(k)?.to_dense());
    }
    if k > 0 {
        let dt = sparse::transpose(cx.d(k - 1)?.matrix());
        let b = sparse::product(&dt, cx.mass(k)?.matrix());
        blocks.push(csr_to_dense(&b));
    }
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum::<usize>().max(nk);
    let mut a = DMatrix::zeros(rows, nk);
    let mut r0 = 0;
    for b in &blocks {
        let s = b.amax();
        let s = if s > 0.0 { s } else { 1.0 };
        a.view_mut((r0, 0), (b.nrows(), nk)).copy_from(&(b / s));
        r0 += b.nrows();
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Ok(DMatrix::identity(nk, nk));
    }
    let tol = RANK_TOL * smax;
    let ambiguous = svd
        .singular_values
        .iter()
        .filter(|&&s| s >= tol / 10.0 && s <= tol * 10.0)
        .count();
    let null: Vec<usize> = (0..nk).filter(|&i| svd.singular_values[i] < tol).collect();
    if ambiguous > 0 {
        let lower = svd
            .singular_values
            .iter()
            .filter(|&&s| s < tol / 10.0)
            .count();
        let upper = svd
            .singular_values
            .iter()
            .filter(|&&s| s <= tol * 10.0)
            .count();
        return Err(FeecError::RankAmbiguous(format!(
            "{ambiguous} singular value(s) of the degree-{k} harmonic system lie within 10x of the tolerance {tol:e}; \
             harmonic dimension is {lower} or {upper}"
        )));
    }
    let mut out = DMatrix::zeros(nk, null.len());
    for (j, &i) in null.iter().enumerate() {
        out.set_column(j, &v_t.row(i).transpose());
    }
    Ok(out)
}

fn csr_to_dense(a: &CsMat<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.rows(), a.cols());
    for (r, row) in a.outer_iterator().enumerate() {
        for (c, &v) in row.iter() {
            m[(r, c)] += v;
        }
    }
    m
}

/// The symmetric positive semidefinite operator whose kernel is the harmonic
/// space: `DᵀM D + M D' diag(M')⁻¹ D'ᵀ M`.
fn harmonic_operator(cx: &DiscreteComplex, k: usize) -> Result<CsMat<f64>> {
    let n = cx.dim();
    let m = cx.mass(k)?;
    let nk = m.nrows();
    let mut l = sparse::diagonal(&vec![0.0; nk]);
    if k < n {
        let d = cx.d(k)?;
        let md = sparse::product(cx.mass(k + 1)?.matrix(), d.matrix());
        l = sparse::sum(&l, &sparse::product(&sparse::transpose(d.matrix()), &md));
    }
    if k > 0 {
        let d = cx.d(k - 1)?;
        let inv: Vec<f64> = sparse::diag_of(&*cx.mass(k - 1)?)
            .iter()
            .map(|x| 1.0 / x)
            .collect();
        let dtm = sparse::product(&sparse::transpose(d.matrix()), m.matrix());
        let mdd = sparse::product(&sparse::transpose(&dtm), &sparse::diagonal(&inv));
        l = sparse::sum(&l, &sparse::product(&mdd, &dtm));
    }
    Ok(l)
}

fn extent(cx: &DiscreteComplex) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in cx.mesh().vertices() {
        for i in 0..3 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (0..3).map(|i| (hi[i] - lo[i]).powi(2)).sum::<f64>().sqrt()
}

/// Shift-invert subspace iteration for the kernel of the harmonic operator.
fn sparse_null_space(cx: &DiscreteComplex, k: usize) -> Result<DMatrix<f64>> {
    let m = cx.mass(k)?;
    let nk = m.nrows();
    let l = harmonic_operator(cx, k)?;
    let diam2 = extent(cx).powi(2);
    let shift = SPARSE_SHIFT / diam2;
    let shifted = sparse::sum(&l, &(m.matrix() * shift));
    let mut trip = Vec::with_capacity(shifted.nnz());
    sparse::shifted_triplets(&shifted, 0, 0, &mut trip);
    let system = SparseSystem::from_triplets(nk, &trip);
    let fact = Factorized::cholesky(&system)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cx.seed());
    let mut block = 8.min(nk);
    loop {
        let mut x = DMatrix::from_fn(nk, block, |_, _| rng.gen::<f64>() - 0.5);
        let mut prev_count = usize::MAX;
        let mut result = None;
        for it in 0..40 {
            let mut y = DMatrix::zeros(nk, x.ncols());
            for j in 0..x.ncols() {
                let mx = sparse::apply(m.matrix(), x.column(j).as_slice());
                let (sol, _) = fact.refine(&mx, 1e-13);
                y.set_column(j, &DVector::from_vec(sol));
            }
            m_gram_schmidt(&mut y, m.matrix(), &mut rng);
            let ly = apply_cols(&l, &y);
            let h = y.transpose() * ly;
            let h = (&h + h.transpose()) * 0.5;
            let eig = SymmetricEigen::new(h);
            let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i] * diam2).collect();
            let w = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
                eig.eigenvectors[(r, order[c])]
            });
            x = &y * w;
            let count = theta.iter().filter(|&&t| t < ZERO_EIG).count();
            if it >= 3 && count == prev_count {
                result = Some((count, theta));
                break;
            }
            prev_count = count;
        }
        let (count, theta) = result.ok_or_else(|| {
            FeecError::RankAmbiguous(format!("degree-{k} kernel iteration did not settle"))
        })?;
        if count >= x.ncols() && x.ncols() < nk {
            block = (block * 2).min(nk);
            continue;
        }
        if let Some(t) = theta
            .iter()
            .find(|&&t| (ZERO_EIG / 10.0..=ZERO_EIG * 10.0).contains(&t))
        {
            return Err(FeecError::RankAmbiguous(format!(
                "degree-{k} Hodge Laplacian has a scaled eigenvalue {t:e} within 10x of the zero threshold {ZERO_EIG:e}"
            )));
        }
        return Ok(x.columns(0, count).into_owned());
    }
}

fn apply_cols(a: &CsMat<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.rows(), x.ncols());
    for j in 0..x.ncols() {
        out.set_column(
            j,
            &DVector::from_vec(sparse::apply(a, x.column(j).as_slice())),
        );
    }
    out
}

/// `M`-orthonormalize the columns in place by Gram–Schmidt with one
/// reorthogonalization pass. Columns that vanish numerically are replaced by
/// fresh random vectors so the block keeps its size.
fn m_gram_schmidt(y: &mut DMatrix<f64>, m: &CsMat<f64>, rng: &mut ChaCha8Rng) {
    let nk = y.nrows();
    let mut my: Vec<DVector<f64>> = Vec::with_capacity(y.ncols());
    for j in 0..y.ncols() {
        for attempt in 0..3 {
            let start = m_norm(m, &y.column(j).clone_owned());
            for _ in 0..2 {
                for (i, mi) in my.iter().enumerate() {
                    let c = mi.dot(&y.column(j));
                    let qi = y.column(i).clone_owned();
                    y.column_mut(j).axpy(-c, &qi, 1.0);
                }
            }
            let mv = DVector::from_vec(sparse::apply(m, y.column(j).as_slice()));
            let nrm = mv.dot(&y.column(j)).max(0.0).sqrt();
            if (nrm > 1e-10 * start && nrm > 0.0) || attempt == 2 {
                y.column_mut(j).unscale_mut(nrm);
                my.push(mv / nrm);
                break;
            }
            let fresh = DVector::from_fn(nk, |_, _| rng.gen::<f64>() - 0.5);
            y.set_column(j, &fresh);
        }
    }
}

fn m_norm(m: &CsMat<f64>, x: &DVector<f64>) -> f64 {
    DVector::from_vec(sparse::apply(m, x.as_slice()))
        .dot(x)
        .max(0.0)
        .sqrt()
}

/// `M`-orthonormalize via Cholesky of the Gram matrix, then fix signs so the
/// largest-magnitude entry of each column is positive.
fn orthonormalize(n: &DMatrix<f64>, m: &CsMat<f64>) -> Result<DMatrix<f64>> {
    let g = n.transpose() * apply_cols(m, n);
    let g = (&g + g.transpose()) * 0.5;
    let chol = g.cholesky().ok_or_else(|| {
        FeecError::RankDeficient("harmonic candidates are linearly dependent".into())
    })?;
    let l = chol.l();
    // Q = N L^{-T}
    let lt = l.transpose();
    let mut q = n.clone();
    let solved = lt
        .solve_upper_triangular(&DMatrix::identity(lt.nrows(), lt.ncols()))
        .ok_or_else(|| FeecError::RankDeficient("singular Gram factor".into()))?;
    q *= solved;
    for j in 0..q.ncols() {
        let mut best = 0;
        for i in 0..q.nrows() {
            if q[(i, j)].abs() > q[(best, j)].abs() * (1.0 + 1e-12) {
                best = i;
            }
        }
        if q[(best, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}
