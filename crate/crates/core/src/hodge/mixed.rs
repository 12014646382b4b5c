use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::harmonic::{harmonic_basis, HarmonicBasis};
use super::linsolve::{Factorized, SparseSystem};
use super::sparse;
use crate::derham::{Bc, CochainVec, DiscreteComplex};
use crate::error::{FeecError, Result};
use crate::mesh::Point;
use crate::numfmt::to_json_string;
use crate::polyform::simplex_rule;

/// Analytic differential form: returns the coefficients at a point in the
/// lexicographic `dx_I` basis.
pub type FormFn<'a> = dyn Fn(&Point) -> Vec<f64> + Sync + 'a;

/// Required relative residual of the saddle-point solve.
pub const SOLVE_TOL: f64 = 1e-10;

/// Quadrature degree for load vectors.
pub const LOAD_QUAD_DEGREE: usize = 6;

/// Discrete solution `(σ_h, u_h, p_h)` of the mixed Hodge Laplacian.
#[derive(Clone, Debug)]
pub struct MixedSolution {
    pub k: usize,
    pub bc: Bc,
    /// Degree `k-1` part; `None` when `k = 0`.
    pub sigma: Option<CochainVec>,
    pub u: CochainVec,
    /// Coefficients over the harmonic basis.
    pub p: Vec<f64>,
    pub harmonic: Arc<HarmonicBasis>,
    pub residual: f64,
    pub system_size: usize,
}

impl MixedSolution {
    /// `p_h` as a cochain.
    pub fn p_cochain(&self) -> CochainVec {
        CochainVec::new(self.u.space().clone(), self.harmonic.combine(&self.p))
            .expect("matching length")
    }

    pub fn to_json(&self) -> String {
        to_json_string(&SolutionDoc {
            k: self.k,
            bc: self.bc.name(),
            dofs: DofCounts {
                sigma: self.sigma.as_ref().map_or(0, |s| s.values().len()),
                u: self.u.values().len(),
                p: self.p.len(),
            },
            sigma: self.sigma.as_ref().map_or(&[][..], |s| s.values()),
            u: self.u.values(),
            p: &self.p,
            residual: self.residual,
            system_size: self.system_size,
        })
    }
}

#[derive(Serialize)]
struct DofCounts {
    sigma: usize,
    u: usize,
    p: usize,
}

#[derive(Serialize)]
struct SolutionDoc<'a> {
    k: usize,
    bc: &'static str,
    dofs: DofCounts,
    sigma: &'a [f64],
    u: &'a [f64],
    p: &'a [f64],
    residual: f64,
    system_size: usize,
}

/// `F_i = ⟨f, w_i⟩` assembled cell by cell.
pub fn load_vector(cx: &DiscreteComplex, k: usize, f: &FormFn<'_>) -> Result<Vec<f64>> {
    let space = cx.space(k)?;
    let mesh = cx.mesh().clone();
    let n = mesh.dim();
    let ncomp = crate::mesh::binomial(n, k);
    let rule = simplex_rule(n, LOAD_QUAD_DEGREE);
    let bary = cx.barycentric();
    let local: Vec<Result<Vec<(usize, f64)>>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let pts = mesh.cell_points(c);
            let vol = mesh.geometry().volume[c].abs();
            let basis = crate::derham::local_basis(&space, &bary[c], c);
            let mut acc = vec![0.0; basis.len()];
            let mut wv = vec![0.0; ncomp];
            for q in 0..rule.len() {
                let x = rule.point(q, &pts);
                let fx = f(&x);
                if fx.len() != ncomp {
                    return Err(FeecError::DimensionMismatch(format!(
                        "form callback returned {} coefficients, expected {ncomp} for a {k}-form in {n}D",
                        fx.len()
                    )));
                }
                if fx.iter().any(|v| !v.is_finite()) {
                    return Err(FeecError::InvalidArgument(format!(
                        "form callback returned a non-finite value at {x:?}"
                    )));
                }
                for (a, (_, w)) in acc.iter_mut().zip(&basis) {
                    w.eval_into(&x, &mut wv);
                    *a += rule.weight(q) * wv.iter().zip(&fx).map(|(p, q)| p * q).sum::<f64>();
                }
            }
            Ok(basis
                .iter()
                .zip(acc)
                .filter_map(|((dof, _), a)| dof.map(|d| (d, a * vol)))
                .collect())
        })
        .collect();
    let mut out = vec![0.0; space.dim()];
    for cell in local {
        for (d, v) in cell? {
            out[d] += v;
        }
    }
    Ok(out)
}

/// Solve the mixed Hodge Laplacian with right-hand side `f`.
pub fn solve_hodge_laplacian(
    cx: &DiscreteComplex,
    k: usize,
    f: &FormFn<'_>,
) -> Result<MixedSolution> {
    let load = load_vector(cx, k, f)?;
    solve_with_load(cx, k, &load)
}

/// Block layout of the symmetrized saddle-point system.
pub(crate) struct MixedSystem {
    pub system: SparseSystem,
    pub ns: usize,
    pub nu: usize,
    pub np: usize,
}

pub(crate) fn assemble(cx: &DiscreteComplex, k: usize, h: &HarmonicBasis) -> Result<MixedSystem> {
    let n = cx.dim();
    let mk = cx.mass(k)?;
    let nu = mk.nrows();
    let ns = if k > 0 { cx.space(k - 1)?.dim() } else { 0 };
    let np = h.dim();
    let total = ns + nu + np;
    let mut trip = Vec::new();
    if k > 0 {
        let d = cx.d(k - 1)?;
        let ms = cx.mass(k - 1)?;
        let neg = ms.matrix() * -1.0;
        sparse::shifted_triplets(&neg, 0, 0, &mut trip);
        // M_k D^{k-1} and its transpose
        let md = sparse::product(mk.matrix(), d.matrix());
        sparse::shifted_triplets(&md, ns, 0, &mut trip);
        sparse::shifted_triplets(&sparse::transpose(&md), 0, ns, &mut trip);
    }
    if k < n {
        let d = cx.d(k)?;
        let md = sparse::product(cx.mass(k + 1)?.matrix(), d.matrix());
        let a = sparse::product(&sparse::transpose(d.matrix()), &md);
        sparse::shifted_triplets(&a, ns, ns, &mut trip);
    }
    for j in 0..np {
        let mq = mk.apply(h.matrix().column(j).as_slice());
        for (i, v) in mq.into_iter().enumerate() {
            if v != 0.0 {
                trip.push((ns + i, ns + nu + j, v));
                trip.push((ns + nu + j, ns + i, v));
            }
        }
    }
    Ok(MixedSystem {
        system: SparseSystem::from_triplets(total, &trip),
        ns,
        nu,
        np,
    })
}

/// Solve with a precomputed load vector over `V^k`.
pub fn solve_with_load(cx: &DiscreteComplex, k: usize, load: &[f64]) -> Result<MixedSolution> {
    let space = cx.space(k)?;
    if load.len() != space.dim() {
        return Err(FeecError::DimensionMismatch(format!(
            "load vector of length {} for a space with {} dofs",
            load.len(),
            space.dim()
        )));
    }
    let h = harmonic_basis(cx, k)?;
    let sys = assemble(cx, k, &h)?;
    let total = sys.ns + sys.nu + sys.np;
    let mut rhs = vec![0.0; total];
    rhs[sys.ns..sys.ns + sys.nu].copy_from_slice(load);
    let (x, residual) = if total == 0 {
        (Vec::new(), 0.0)
    } else {
        let fact = Factorized::lu(&sys.system).map_err(|e| match e {
            FeecError::Singular(msg) => FeecError::Singular(format!(
                "{msg}; the degree-{k} harmonic basis (dimension {}) may be mis-sized",
                h.dim()
            )),
            other => other,
        })?;
        fact.solve(&rhs, SOLVE_TOL)?
    };
    let sigma = if k > 0 {
        Some(CochainVec::new(cx.space(k - 1)?, x[..sys.ns].to_vec())?)
    } else {
        None
    };
    let u = CochainVec::new(space, x[sys.ns..sys.ns + sys.nu].to_vec())?;
    Ok(MixedSolution {
        k,
        bc: cx.bc(),
        sigma,
        u,
        p: x[sys.ns + sys.nu..].to_vec(),
        harmonic: h,
        residual,
        system_size: total,
    })
}
