use serde::Serialize;

use super::local::{
    cell_jump_norms, cell_norm_sq, check_problem, check_solution, face_jumps, per_cell,
    poly_norm_sq, reconstruct_all, star_at, CellFields,
};
use super::problem::ProblemData;
use crate::derham::{CochainVec, DiscreteComplex};
use crate::error::Result;
use crate::hodge::{HarmonicBasis, MixedSolution};
use crate::polyform::alt::star_coeffs;
use crate::polyform::PolyForm;

/// `η₋₁(K)` for every cell.
pub fn eta_minus1(cx: &DiscreteComplex, sol: &MixedSolution) -> Result<Vec<f64>> {
    check_solution(cx, sol)?;
    eta_minus1_with(cx, sol.k, &CellFields::new(cx, sol))
}

pub(crate) fn eta_minus1_with(
    cx: &DiscreteComplex,
    k: usize,
    fields: &CellFields,
) -> Result<Vec<f64>> {
    let mesh = cx.mesh();
    let nc = mesh.num_cells();
    if k == 0 {
        return Ok(vec![0.0; nc]);
    }
    let n = mesh.dim();
    let sigma = fields.sigma.as_ref().expect("sigma exists for k >= 1");
    let h = &mesh.geometry().h;
    let vol: Vec<f64> = per_cell(nc, |c| {
        let du = fields.u[c].codifferential()?;
        let a = poly_norm_sq(mesh, c, &sigma[c].sub(&du)).sqrt();
        let b = if k >= 2 {
            poly_norm_sq(mesh, c, &sigma[c].codifferential()?).sqrt()
        } else {
            0.0
        };
        Ok(a + b)
    })?;
    let ju = cell_jump_norms(
        mesh,
        &face_jumps(mesh, cx.bc(), n - k, &|c, x| star_at(&fields.u[c], x)),
    );
    let js = if k >= 2 {
        cell_jump_norms(
            mesh,
            &face_jumps(mesh, cx.bc(), n - k + 1, &|c, x| star_at(&sigma[c], x)),
        )
    } else {
        vec![0.0; nc]
    };
    Ok((0..nc)
        .map(|c| h[c] * vol[c] + h[c].sqrt() * (js[c] + ju[c]))
        .collect())
}

/// `η₀(K)` for every cell.
pub fn eta_zero(
    cx: &DiscreteComplex,
    problem: &ProblemData,
    sol: &MixedSolution,
) -> Result<Vec<f64>> {
    check_problem(cx, problem, sol)?;
    eta_zero_with(cx, problem, &CellFields::new(cx, sol))
}

pub(crate) fn eta_zero_with(
    cx: &DiscreteComplex,
    problem: &ProblemData,
    fields: &CellFields,
) -> Result<Vec<f64>> {
    let mesh = cx.mesh();
    let n = mesh.dim();
    let k = problem.k;
    let nc = mesh.num_cells();
    let h = &mesh.geometry().h;
    let f = &problem.f;
    // Discrete part of the residual f - dσ_h - p_h on each cell.
    let discrete: Vec<PolyForm> = per_cell(nc, |c| {
        let mut r = fields.p[c].clone();
        if let Some(sigma) = &fields.sigma {
            r = r.add(&sigma[c].d()?);
        }
        Ok(r)
    })?;
    let residual = |c: usize, x: &crate::mesh::Point| -> Vec<f64> {
        let mut v = f(x);
        for (a, b) in v.iter_mut().zip(discrete[c].eval(x)) {
            *a -= b;
        }
        v
    };
    if k == n {
        return per_cell(nc, |c| Ok(cell_norm_sq(mesh, c, |x| residual(c, x)).sqrt()));
    }
    let ddu: Vec<(PolyForm, Option<PolyForm>)> = per_cell(nc, |c| {
        let du = fields.u[c].d()?;
        let delta_du = du.codifferential()?;
        let delta_discrete = if k >= 1 {
            Some(discrete[c].codifferential()?)
        } else {
            None
        };
        Ok((delta_du, delta_discrete))
    })?;
    let jdu = cell_jump_norms(
        mesh,
        &face_jumps(mesh, cx.bc(), n - k - 1, &|c, x| {
            star_at(&fields.u[c].d().expect("k < n"), x)
        }),
    );
    let delta_f = if k >= 1 {
        Some(problem.require_delta_f(n)?)
    } else {
        None
    };
    let vol: Vec<f64> = per_cell(nc, |c| {
        let (delta_du, delta_discrete) = &ddu[c];
        let a = cell_norm_sq(mesh, c, |x| {
            let mut v = residual(c, x);
            for (vi, di) in v.iter_mut().zip(delta_du.eval(x)) {
                *vi -= di;
            }
            v
        })
        .sqrt();
        let b = match (delta_f, delta_discrete) {
            (Some(df), Some(dd)) => cell_norm_sq(mesh, c, |x| {
                let mut v = df(x);
                for (vi, di) in v.iter_mut().zip(dd.eval(x)) {
                    *vi -= di;
                }
                v
            })
            .sqrt(),
            _ => 0.0,
        };
        Ok(a + b)
    })?;
    let jr = if k >= 1 {
        cell_jump_norms(
            mesh,
            &face_jumps(mesh, cx.bc(), n - k, &|c, x| {
                star_coeffs(n, k, &residual(c, x))
            }),
        )
    } else {
        vec![0.0; nc]
    };
    Ok((0..nc)
        .map(|c| h[c] * vol[c] + h[c].sqrt() * (jdu[c] + jr[c]))
        .collect())
}

/// `η_H(K, q)` for every cell.
pub fn eta_h(cx: &DiscreteComplex, q: &CochainVec) -> Result<Vec<f64>> {
    let k = q.space().degree();
    if k == 0 {
        return Ok(vec![0.0; cx.mesh().num_cells()]);
    }
    eta_h_with(cx, k, &reconstruct_all(cx, q))
}

pub(crate) fn eta_h_with(cx: &DiscreteComplex, k: usize, q: &[PolyForm]) -> Result<Vec<f64>> {
    let mesh = cx.mesh();
    let nc = mesh.num_cells();
    if k == 0 {
        return Ok(vec![0.0; nc]);
    }
    let n = mesh.dim();
    let h = &mesh.geometry().h;
    let vol: Vec<f64> = per_cell(nc, |c| {
        Ok(poly_norm_sq(mesh, c, &q[c].codifferential()?).sqrt())
    })?;
    let j = cell_jump_norms(
        mesh,
        &face_jumps(mesh, cx.bc(), n - k, &|c, x| star_at(&q[c], x)),
    );
    Ok((0..nc)
        .map(|c| h[c] * vol[c] + h[c].sqrt() * j[c])
        .collect())
}

/// A posteriori bound for the gap between continuous and discrete harmonic
/// forms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapBound {
    pub mu_i: Vec<f64>,
    pub mu: f64,
}

pub fn gap_bound(cx: &DiscreteComplex, basis: &HarmonicBasis) -> Result<GapBound> {
    let mut mu_i = Vec::with_capacity(basis.dim());
    for i in 0..basis.dim() {
        let eta = eta_h(cx, &basis.member(i))?;
        mu_i.push(eta.iter().map(|e| e * e).sum::<f64>().sqrt());
    }
    let mu = mu_i.iter().map(|m| m * m).sum::<f64>().sqrt();
    Ok(GapBound { mu_i, mu })
}
