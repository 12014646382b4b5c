//! Element and face integrals shared by the indicator computations.

use rayon::prelude::*;

use super::problem::ProblemData;
use crate::derham::{reconstruct, Bc, CochainVec, DiscreteComplex};
use crate::error::{FeecError, Result};
use crate::hodge::MixedSolution;
use crate::mesh::{Point, SimplicialComplex, NO_CELL};
use crate::polyform::alt::star_coeffs;
use crate::polyform::{simplex_rule, FaceFrame, PolyForm};

/// Quadrature degree for integrands involving analytic data.
pub const ANALYTIC_DEGREE: usize = 6;

/// `∫_K |g|²` for a pointwise coefficient field `g`.
pub fn cell_norm_sq(
    mesh: &SimplicialComplex,
    c: usize,
    mut g: impl FnMut(&Point) -> Vec<f64>,
) -> f64 {
    let pts = mesh.cell_points(c);
    let rule = simplex_rule(mesh.dim(), ANALYTIC_DEGREE);
    let vol = mesh.geometry().volume[c].abs();
    let mut s = 0.0;
    for q in 0..rule.len() {
        let v = g(&rule.point(q, &pts));
        s += rule.weight(q) * v.iter().map(|x| x * x).sum::<f64>();
    }
    s * vol
}

/// `‖ω‖²_K` for a polynomial form (exact quadrature).
pub fn poly_norm_sq(mesh: &SimplicialComplex, c: usize, omega: &PolyForm) -> f64 {
    omega.inner_product(omega, &mesh.cell_points(c), 4).max(0.0)
}

/// `∫_F |⟦tr g⟧|²` over `(n-1)`-face `f`, where `g(c, x)` returns the
/// coefficients of a `j`-form on cell `c`. Boundary faces use the one-sided
/// trace for natural conditions and contribute nothing for essential ones.
pub fn face_jump_sq(
    mesh: &SimplicialComplex,
    bc: Bc,
    f: usize,
    j: usize,
    g: &(dyn Fn(usize, &Point) -> Vec<f64> + Sync),
) -> f64 {
    let n = mesh.dim();
    let [c0, c1] = mesh.face_cells(f);
    if j >= n || (c1 == NO_CELL && bc == Bc::Essential) {
        return 0.0;
    }
    let pts = mesh.face_points(n - 1, f);
    let frame = FaceFrame::new(n, &pts, &mesh.geometry().face_normal[f]);
    let pm = frame.pullback_matrix(j);
    let ncols = crate::polyform::alt::num_components(n - 1, j);
    let rule = simplex_rule(n - 1, ANALYTIC_DEGREE);
    let mut s = 0.0;
    for q in 0..rule.len() {
        let x = rule.point(q, &pts);
        let mut a = g(c0, &x);
        if c1 != NO_CELL {
            for (ai, bi) in a.iter_mut().zip(g(c1, &x)) {
                *ai -= bi;
            }
        }
        let t2: f64 = (0..ncols)
            .map(|col| {
                let t: f64 = a
                    .iter()
                    .enumerate()
                    .map(|(i, ai)| ai * pm[i * ncols + col])
                    .sum();
                t * t
            })
            .sum();
        s += rule.weight(q) * t2;
    }
    s * mesh.geometry().face_area[f]
}

/// Per-face squared jumps of a field.
pub fn face_jumps(
    mesh: &SimplicialComplex,
    bc: Bc,
    j: usize,
    g: &(dyn Fn(usize, &Point) -> Vec<f64> + Sync),
) -> Vec<f64> {
    if j >= mesh.dim() {
        return vec![0.0; mesh.num_faces(mesh.dim() - 1)];
    }
    (0..mesh.num_faces(mesh.dim() - 1))
        .into_par_iter()
        .map(|f| face_jump_sq(mesh, bc, f, j, g))
        .collect()
}

/// `‖⟦·⟧‖_{∂K}` for every cell from per-face squared jumps.
pub fn cell_jump_norms(mesh: &SimplicialComplex, face_sq: &[f64]) -> Vec<f64> {
    let n = mesh.dim();
    (0..mesh.num_cells())
        .map(|c| {
            mesh.cell_face_ids(n - 1, c)
                .iter()
                .map(|&f| face_sq[f])
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Coefficients of `⋆ω(x)` for a polynomial `k`-form.
pub fn star_at(omega: &PolyForm, x: &Point) -> Vec<f64> {
    star_coeffs(omega.dim(), omega.degree(), &omega.eval(x))
}

/// Elementwise reconstructions of a mixed solution.
pub struct CellFields {
    pub sigma: Option<Vec<PolyForm>>,
    pub u: Vec<PolyForm>,
    pub p: Vec<PolyForm>,
}

pub fn reconstruct_all(cx: &DiscreteComplex, v: &CochainVec) -> Vec<PolyForm> {
    let bary = cx.barycentric();
    (0..cx.mesh().num_cells())
        .into_par_iter()
        .map(|c| reconstruct(v, &bary[c], c))
        .collect()
}

impl CellFields {
    pub fn new(cx: &DiscreteComplex, sol: &MixedSolution) -> Self {
        CellFields {
            sigma: sol.sigma.as_ref().map(|s| reconstruct_all(cx, s)),
            u: reconstruct_all(cx, &sol.u),
            p: reconstruct_all(cx, &sol.p_cochain()),
        }
    }
}

/// Apply a fallible per-cell map in parallel.
pub fn per_cell<T: Send>(n_cells: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..n_cells).into_par_iter().map(&f).collect()
}

pub(crate) fn check_problem(
    cx: &DiscreteComplex,
    problem: &ProblemData,
    sol: &MixedSolution,
) -> Result<()> {
    if problem.k != sol.k || problem.bc != sol.bc || cx.bc() != sol.bc {
        return Err(FeecError::DimensionMismatch(format!(
            "problem (k={}, {}) does not match the solution (k={}, {})",
            problem.k, problem.bc, sol.k, sol.bc
        )));
    }
    check_solution(cx, sol)
}

pub(crate) fn check_solution(cx: &DiscreteComplex, sol: &MixedSolution) -> Result<()> {
    let space = cx.space(sol.k)?;
    if !std::sync::Arc::ptr_eq(&space, sol.u.space()) {
        return Err(FeecError::DimensionMismatch(
            "solution was computed on a different complex".into(),
        ));
    }
    Ok(())
}
