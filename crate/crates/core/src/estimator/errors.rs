use rayon::prelude::*;
use serde::Serialize;

use super::local::{cell_norm_sq, per_cell, CellFields};
use super::problem::{ExactSolution, SharedForm};
use crate::derham::DiscreteComplex;
use crate::error::{FeecError, Result};
use crate::hodge::MixedSolution;
use crate::mesh::Point;
use crate::polyform::PolyForm;

/// Quadrature degree for differences of discrete fields.
const REFERENCE_DEGREE: usize = 4;

/// Below this error norm the effectivity index is reported as infinite.
pub const EFFECTIVITY_FLOOR: f64 = 1e-12;

/// Per-cell squared error contributions in the `HΛ` norms.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ElementErrors {
    pub sigma_sq: Vec<f64>,
    pub u_sq: Vec<f64>,
    pub p_sq: Vec<f64>,
}

impl ElementErrors {
    pub fn e_sigma(&self) -> f64 {
        self.sigma_sq.iter().sum::<f64>().sqrt()
    }

    pub fn e_u(&self) -> f64 {
        self.u_sq.iter().sum::<f64>().sqrt()
    }

    pub fn e_p(&self) -> f64 {
        self.p_sq.iter().sum::<f64>().sqrt()
    }

    /// `‖e_σ‖_H + ‖e_u‖_H + ‖e_p‖`.
    pub fn total(&self) -> f64 {
        self.e_sigma() + self.e_u() + self.e_p()
    }

    /// Squared total error restricted to one cell.
    pub fn cell_sq(&self, c: usize) -> f64 {
        self.sigma_sq[c] + self.u_sq[c] + self.p_sq[c]
    }
}

/// Discrete solution on a finer nested mesh, used in place of an exact one.
pub struct ReferenceSolution {
    cx: DiscreteComplex,
    fields: CellFields,
    k: usize,
    dsigma: Option<Vec<PolyForm>>,
    du: Option<Vec<PolyForm>>,
}

impl ReferenceSolution {
    pub fn new(cx: DiscreteComplex, sol: &MixedSolution) -> Result<Self> {
        let fields = CellFields::new(&cx, sol);
        let nc = cx.mesh().num_cells();
        let dsigma = match &fields.sigma {
            Some(s) => Some(per_cell(nc, |c| s[c].d())?),
            None => None,
        };
        let du = if sol.k < cx.dim() {
            Some(per_cell(nc, |c| fields.u[c].d())?)
        } else {
            None
        };
        Ok(ReferenceSolution {
            cx,
            fields,
            k: sol.k,
            dsigma,
            du,
        })
    }

    pub fn complex(&self) -> &DiscreteComplex {
        &self.cx
    }
}

/// Where the errors of a discrete solution are measured against.
pub enum ErrorSource<'a> {
    Exact(&'a ExactSolution),
    /// `parent[f]` is the cell of the coarse mesh containing reference cell `f`.
    Reference {
        reference: &'a ReferenceSolution,
        parent: &'a [usize],
    },
}

/// Compose per-level parent maps, finest last, into a map from the finest
/// mesh to the first.
pub fn compose_parents(maps: &[Vec<usize>]) -> Vec<usize> {
    let mut out: Vec<usize> = match maps.last() {
        Some(m) => m.clone(),
        None => return Vec::new(),
    };
    for m in maps.iter().rev().skip(1) {
        for p in &mut out {
            *p = m[*p];
        }
    }
    out
}

fn require<'a>(f: &'a Option<SharedForm>, name: &str) -> Result<&'a SharedForm> {
    f.as_ref()
        .ok_or_else(|| FeecError::Missing(format!("exact solution lacks `{name}`")))
}

fn diff_sq(cx: &DiscreteComplex, c: usize, exact: &SharedForm, discrete: &PolyForm) -> f64 {
    cell_norm_sq(cx.mesh(), c, |x: &Point| {
        let mut v = exact(x);
        for (a, b) in v.iter_mut().zip(discrete.eval(x)) {
            *a -= b;
        }
        v
    })
}

/// Per-cell error contributions of `sol`.
pub fn element_errors(
    cx: &DiscreteComplex,
    sol: &MixedSolution,
    source: &ErrorSource<'_>,
) -> Result<ElementErrors> {
    let fields = CellFields::new(cx, sol);
    match source {
        ErrorSource::Exact(exact) => exact_errors(cx, sol.k, &fields, exact),
        ErrorSource::Reference { reference, parent } => {
            reference_errors(cx, sol.k, &fields, reference, parent)
        }
    }
}

fn exact_errors(
    cx: &DiscreteComplex,
    k: usize,
    fields: &CellFields,
    exact: &ExactSolution,
) -> Result<ElementErrors> {
    let n = cx.dim();
    let nc = cx.mesh().num_cells();
    let u = require(&exact.u, "u")?;
    let du = if k < n {
        Some(require(&exact.du, "du")?)
    } else {
        None
    };
    let (sigma, dsigma) = if k > 0 {
        (
            Some(require(&exact.sigma, "sigma")?),
            Some(require(&exact.dsigma, "dsigma")?),
        )
    } else {
        (None, None)
    };
    let zero: SharedForm = {
        let m = crate::polyform::alt::num_components(n, k);
        std::sync::Arc::new(move |_: &Point| vec![0.0; m])
    };
    let p = exact.p.as_ref().unwrap_or(&zero);
    let rows: Vec<(f64, f64, f64)> = per_cell(nc, |c| {
        let mut s = 0.0;
        if let (Some(sig), Some(dsig), Some(sh)) = (sigma, dsigma, &fields.sigma) {
            s = diff_sq(cx, c, sig, &sh[c]) + diff_sq(cx, c, dsig, &sh[c].d()?);
        }
        let mut e = diff_sq(cx, c, u, &fields.u[c]);
        if let Some(du) = du {
            e += diff_sq(cx, c, du, &fields.u[c].d()?);
        }
        Ok((s, e, diff_sq(cx, c, p, &fields.p[c])))
    })?;
    Ok(split(rows))
}

fn split(rows: Vec<(f64, f64, f64)>) -> ElementErrors {
    let mut out = ElementErrors::default();
    for (s, u, p) in rows {
        out.sigma_sq.push(s);
        out.u_sq.push(u);
        out.p_sq.push(p);
    }
    out
}

fn reference_errors(
    cx: &DiscreteComplex,
    k: usize,
    fields: &CellFields,
    reference: &ReferenceSolution,
    parent: &[usize],
) -> Result<ElementErrors> {
    let rmesh = reference.cx.mesh();
    let nc = cx.mesh().num_cells();
    if parent.len() != rmesh.num_cells() || reference.k != k || rmesh.dim() != cx.dim() {
        return Err(FeecError::DimensionMismatch(
            "reference solution does not match the coarse solution".into(),
        ));
    }
    if let Some(&bad) = parent.iter().find(|&&p| p >= nc) {
        return Err(FeecError::DimensionMismatch(format!(
            "parent map points to cell {bad} of a mesh with {nc} cells"
        )));
    }
    let coarse_dsigma = match &fields.sigma {
        Some(s) => Some(per_cell(nc, |c| s[c].d())?),
        None => None,
    };
    let coarse_du = match reference.du {
        Some(_) => Some(per_cell(nc, |c| fields.u[c].d())?),
        None => None,
    };
    let sq = |a: &PolyForm, b: &PolyForm, pts: &[Point]| {
        let d = a.sub(b);
        d.inner_product(&d, pts, REFERENCE_DEGREE).max(0.0)
    };
    let fine: Vec<(f64, f64, f64)> = (0..rmesh.num_cells())
        .into_par_iter()
        .map(|f| {
            let c = parent[f];
            let pts = rmesh.cell_points(f);
            let mut s = 0.0;
            if let (Some(rs), Some(cs), Some(rds), Some(cds)) = (
                &reference.fields.sigma,
                &fields.sigma,
                &reference.dsigma,
                &coarse_dsigma,
            ) {
                s = sq(&rs[f], &cs[c], &pts) + sq(&rds[f], &cds[c], &pts);
            }
            let mut u = sq(&reference.fields.u[f], &fields.u[c], &pts);
            if let (Some(rdu), Some(cdu)) = (&reference.du, &coarse_du) {
                u += sq(&rdu[f], &cdu[c], &pts);
            }
            let p = sq(&reference.fields.p[f], &fields.p[c], &pts);
            (s, u, p)
        })
        .collect();
    let mut out = ElementErrors {
        sigma_sq: vec![0.0; nc],
        u_sq: vec![0.0; nc],
        p_sq: vec![0.0; nc],
    };
    for (f, (s, u, p)) in fine.into_iter().enumerate() {
        let c = parent[f];
        out.sigma_sq[c] += s;
        out.u_sq[c] += u;
        out.p_sq[c] += p;
    }
    Ok(out)
}

/// `total / error`, or `+∞` when the error is below [`EFFECTIVITY_FLOOR`].
pub fn effectivity(total: f64, error: f64) -> f64 {
    if error < EFFECTIVITY_FLOOR {
        f64::INFINITY
    } else {
        total / error
    }
}

/// `max_K η(K) / (‖e‖_{ω_K} + osc_{ω_K})` over cells with a positive
/// denominator, where `ω_K` is the vertex patch of `K`.
pub fn local_efficiency(
    cx: &DiscreteComplex,
    eta: &[f64],
    errors: &ElementErrors,
    osc_sq: &[f64],
) -> f64 {
    let mesh = cx.mesh();
    (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let patch = mesh.element_patch(c);
            let e: f64 = patch.iter().map(|&q| errors.cell_sq(q)).sum::<f64>().sqrt();
            let o: f64 = patch.iter().map(|&q| osc_sq[q]).sum::<f64>().sqrt();
            let denom = e + o;
            if denom > EFFECTIVITY_FLOOR {
                eta[c] / denom
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max)
}
