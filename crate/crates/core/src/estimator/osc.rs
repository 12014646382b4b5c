use nalgebra::{DMatrix, DVector};

use super::local::{cell_jump_norms, cell_norm_sq, face_jumps, per_cell, ANALYTIC_DEGREE};
use super::problem::ProblemData;
use crate::derham::DiscreteComplex;
use crate::error::{FeecError, Result};
use crate::mesh::{Point, SimplicialComplex};
use crate::polyform::alt::{num_components, star_coeffs};
use crate::polyform::{simplex_rule, Poly, PolyForm, EXPONENTS, MAX_DEGREE};

/// Default polynomial degree of the oscillation projection.
pub const DEFAULT_OSC_DEGREE: usize = 1;

/// Per-cell data oscillation. `osc_delta` is `None` when the problem has no
/// `δf` and the degree is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct Oscillations {
    pub osc: Vec<f64>,
    pub osc_boundary: Vec<f64>,
    pub osc_delta: Option<Vec<f64>>,
}

fn centroid(pts: &[Point]) -> Point {
    let mut c = [0.0; 3];
    for p in pts {
        for a in 0..3 {
            c[a] += p[a];
        }
    }
    c.map(|v| v / pts.len() as f64)
}

/// Monomials `((x - x_K)/h_K)^α` with `|α| ≤ degree` in `n` variables.
fn scaled_monomials(n: usize, degree: usize, center: &Point, h: f64) -> Vec<Poly> {
    let axes: Vec<Poly> = (0..n)
        .map(|a| {
            let mut g = [0.0; 3];
            g[a] = 1.0 / h;
            Poly::affine(-center[a] / h, &g[..n])
        })
        .collect();
    EXPONENTS
        .iter()
        .filter(|e| {
            e.iter().skip(n).all(|&p| p == 0)
                && e.iter().map(|&p| p as usize).sum::<usize>() <= degree
        })
        .map(|e| {
            let mut m = Poly::constant(1.0);
            for (a, &p) in e.iter().enumerate().take(n) {
                for _ in 0..p {
                    m = m.mul(&axes[a]).expect("degree bounded by MAX_DEGREE");
                }
            }
            m
        })
        .collect()
}

/// Componentwise `L²(K)` projection of the analytic `k`-form `f` onto
/// polynomials of the given degree.
pub fn l2_projection(
    mesh: &SimplicialComplex,
    c: usize,
    k: usize,
    f: &(dyn Fn(&Point) -> Vec<f64> + Sync),
    degree: usize,
) -> Result<PolyForm> {
    if degree > MAX_DEGREE {
        return Err(FeecError::InvalidArgument(format!(
            "oscillation degree {degree} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    let n = mesh.dim();
    let ncomp = num_components(n, k);
    let pts = mesh.cell_points(c);
    let basis = scaled_monomials(n, degree, &centroid(&pts), mesh.geometry().h[c]);
    let nb = basis.len();
    let rule = simplex_rule(n, ANALYTIC_DEGREE);
    let mut gram = DMatrix::zeros(nb, nb);
    let mut rhs = DMatrix::zeros(nb, ncomp);
    let mut phi = vec![0.0; nb];
    for q in 0..rule.len() {
        let x = rule.point(q, &pts);
        let w = rule.weight(q);
        let fx = f(&x);
        if fx.len() != ncomp {
            return Err(FeecError::DimensionMismatch(format!(
                "form callback returned {} coefficients, expected {ncomp}",
                fx.len()
            )));
        }
        for (p, b) in phi.iter_mut().zip(&basis) {
            *p = b.eval(&x);
        }
        for i in 0..nb {
            for j in 0..nb {
                gram[(i, j)] += w * phi[i] * phi[j];
            }
            for (comp, v) in fx.iter().enumerate() {
                rhs[(i, comp)] += w * phi[i] * v;
            }
        }
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| FeecError::Singular(format!("projection Gram matrix of cell {c}")))?;
    let coef = chol.solve(&rhs);
    let comps = (0..ncomp)
        .map(|comp| {
            let col: DVector<f64> = coef.column(comp).into_owned();
            let mut p = Poly::zero();
            for (b, a) in basis.iter().zip(col.iter()) {
                p.add_assign(&b.scale(*a));
            }
            p
        })
        .collect();
    PolyForm::from_components(n, k, comps)
}

/// Oscillation of the problem data with projection degree `degree`.
pub fn oscillations(
    cx: &DiscreteComplex,
    problem: &ProblemData,
    degree: usize,
) -> Result<Oscillations> {
    let mesh = cx.mesh();
    let n = mesh.dim();
    let k = problem.k;
    let nc = mesh.num_cells();
    let h = &mesh.geometry().h;
    let f = &problem.f;
    let proj: Vec<PolyForm> = per_cell(nc, |c| l2_projection(mesh, c, k, &**f, degree))?;
    let diff = |c: usize, x: &Point| -> Vec<f64> {
        let mut v = f(x);
        for (a, b) in v.iter_mut().zip(proj[c].eval(x)) {
            *a -= b;
        }
        v
    };
    let osc = per_cell(nc, |c| {
        Ok(h[c] * cell_norm_sq(mesh, c, |x| diff(c, x)).sqrt())
    })?;
    let jumps = cell_jump_norms(
        mesh,
        &face_jumps(mesh, cx.bc(), n - k, &|c, x| star_coeffs(n, k, &diff(c, x))),
    );
    let osc_boundary = (0..nc).map(|c| h[c].sqrt() * jumps[c]).collect();
    let osc_delta = if k == 0 {
        Some(vec![0.0; nc])
    } else if let Some(df) = &problem.delta_f {
        let dproj: Vec<PolyForm> = per_cell(nc, |c| proj[c].codifferential())?;
        Some(per_cell(nc, |c| {
            let s = cell_norm_sq(mesh, c, |x| {
                let mut v = df(x);
                for (a, b) in v.iter_mut().zip(dproj[c].eval(x)) {
                    *a -= b;
                }
                v
            });
            Ok(h[c] * s.sqrt())
        })?)
    } else {
        None
    };
    Ok(Oscillations {
        osc,
        osc_boundary,
        osc_delta,
    })
}
