//! Global lowest-order Whitney de Rham complex.
//!
//! Degrees of freedom are integrals over oriented subsimplices: `k`-faces
//! (`k < n`) are oriented by increasing global vertex id and cells by their
//! stored positive orientation. With this choice `D^k` is the signed
//! incidence matrix and the top-degree basis is `vol / |K|`.

mod operator;

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

pub use operator::SparseOperator;

use crate::error::{FeecError, Result};
use crate::hodge::HarmonicBasis;
use crate::mesh::{subsets, Point, SimplicialComplex};
use crate::polyform::{integrate_over_simplex, whitney_form, Barycentric, PolyForm};

/// Boundary condition flavour of a cochain space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bc {
    Natural,
    Essential,
}

impl Bc {
    pub fn name(self) -> &'static str {
        match self {
            Bc::Natural => "natural",
            Bc::Essential => "essential",
        }
    }
}

impl fmt::Display for Bc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Bc {
    type Err = FeecError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" => Ok(Bc::Natural),
            "essential" => Ok(Bc::Essential),
            _ => Err(FeecError::InvalidArgument(format!(
                "unknown boundary condition `{s}` (expected natural or essential)"
            ))),
        }
    }
}

const NO_DOF: usize = usize::MAX;

/// Degree-`k` Whitney space on a mesh.
#[derive(Debug)]
pub struct CochainSpace {
    mesh: Arc<SimplicialComplex>,
    k: usize,
    bc: Bc,
    dof_of_face: Vec<usize>,
    face_of_dof: Vec<usize>,
}

pub fn make_space(mesh: Arc<SimplicialComplex>, k: usize, bc: Bc) -> Result<CochainSpace> {
    let n = mesh.dim();
    if k > n {
        return Err(FeecError::InvalidDegree {
            degree: k,
            dim: n,
            reason: "form degree exceeds the dimension",
        });
    }
    let nf = mesh.num_faces(k);
    let mut dof_of_face = vec![NO_DOF; nf];
    let mut face_of_dof = Vec::with_capacity(nf);
    for f in 0..nf {
        if bc == Bc::Essential && mesh.is_boundary(k, f) {
            continue;
        }
        dof_of_face[f] = face_of_dof.len();
        face_of_dof.push(f);
    }
    Ok(CochainSpace {
        mesh,
        k,
        bc,
        dof_of_face,
        face_of_dof,
    })
}

impl CochainSpace {
    pub fn mesh(&self) -> &Arc<SimplicialComplex> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn bc(&self) -> Bc {
        self.bc
    }

    pub fn dim(&self) -> usize {
        self.face_of_dof.len()
    }

    /// Dof index of global `k`-face `f`, if it carries one.
    pub fn dof(&self, f: usize) -> Option<usize> {
        let d = self.dof_of_face[f];
        (d != NO_DOF).then_some(d)
    }

    pub fn face(&self, dof: usize) -> usize {
        self.face_of_dof[dof]
    }

    /// Oriented vertex tuple of the subsimplex behind `dof`.
    pub fn oriented_face(&self, dof: usize) -> Vec<usize> {
        let f = self.face_of_dof[dof];
        if self.k == self.mesh.dim() {
            self.mesh.cell(f).to_vec()
        } else {
            self.mesh.face(self.k, f).to_vec()
        }
    }
}

/// Coefficient vector over a [`CochainSpace`].
#[derive(Clone, Debug)]
pub struct CochainVec {
    space: Arc<CochainSpace>,
    values: Vec<f64>,
}

impl CochainVec {
    pub fn new(space: Arc<CochainSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.dim() {
            return Err(FeecError::DimensionMismatch(format!(
                "cochain of length {} for a space with {} dofs",
                values.len(),
                space.dim()
            )));
        }
        Ok(CochainVec { space, values })
    }

    pub fn zeros(space: Arc<CochainSpace>) -> Self {
        let values = vec![0.0; space.dim()];
        CochainVec { space, values }
    }

    pub fn space(&self) -> &Arc<CochainSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Signed incidence matrix `D^k : V^k -> V^{k+1}` between two spaces of the
/// same mesh and boundary condition.
pub fn d_matrix(from: &Arc<CochainSpace>, to: &Arc<CochainSpace>) -> Result<SparseOperator> {
    let k = from.degree();
    let n = from.mesh.dim();
    if k >= n {
        return Err(FeecError::InvalidDegree {
            degree: k,
            dim: n,
            reason: "no exterior derivative out of top-degree forms",
        });
    }
    if to.degree() != k + 1 || !Arc::ptr_eq(&from.mesh, &to.mesh) || from.bc != to.bc {
        return Err(FeecError::DimensionMismatch(
            "d_matrix needs consecutive spaces on the same mesh and boundary condition".into(),
        ));
    }
    let mut trip = Vec::new();
    for row in 0..to.dim() {
        let tau = to.face(row);
        for &(facet, sign) in from.mesh.facets(k + 1, tau) {
            if let Some(col) = from.dof(facet) {
                trip.push((row, col, f64::from(sign)));
            }
        }
    }
    Ok(SparseOperator::from_triplets(
        to.clone(),
        from.clone(),
        &trip,
    ))
}

/// Ordered local vertex positions of every local `k`-subsimplex of cell `c`,
/// following the global orientation convention.
pub fn local_orientations(mesh: &SimplicialComplex, c: usize, k: usize) -> Vec<Vec<usize>> {
    let n = mesh.dim();
    let cell = mesh.cell(c);
    if k == n {
        return vec![(0..=n).collect()];
    }
    subsets(n + 1, k + 1)
        .into_iter()
        .map(|mut rho| {
            rho.sort_by_key(|&a| cell[a]);
            rho
        })
        .collect()
}

/// Local Whitney basis of cell `c` with the global dof each form belongs to
/// (`None` for boundary faces of essential spaces).
pub fn local_basis(
    space: &CochainSpace,
    bary: &Barycentric,
    c: usize,
) -> Vec<(Option<usize>, PolyForm)> {
    let k = space.k;
    let ids = space.mesh.cell_face_ids(k, c);
    local_orientations(&space.mesh, c, k)
        .into_iter()
        .zip(ids)
        .map(|(rho, &f)| (space.dof(f), whitney_form(bary, &rho)))
        .collect()
}

/// Mass matrix `M_{ij} = Σ_K ⟨w_i, w_j⟩_K`.
pub fn mass_matrix(space: &Arc<CochainSpace>, bary: &[Barycentric]) -> SparseOperator {
    let mesh = space.mesh.clone();
    let local: Vec<Vec<(usize, usize, f64)>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let pts = mesh.cell_points(c);
            let basis = local_basis(space, &bary[c], c);
            let mut out = Vec::with_capacity(basis.len() * basis.len());
            for (i, (di, wi)) in basis.iter().enumerate() {
                let Some(di) = di else { continue };
                for (dj, wj) in &basis[i..] {
                    let Some(dj) = dj else { continue };
                    let v = wi.inner_product(wj, &pts, 2);
                    out.push((*di, *dj, v));
                    if di != dj {
                        out.push((*dj, *di, v));
                    }
                }
            }
            out
        })
        .collect();
    let trip: Vec<(usize, usize, f64)> = local.into_iter().flatten().collect();
    SparseOperator::from_triplets(space.clone(), space.clone(), &trip)
}

/// Canonical interpolant: dof `i` is the integral of `f` over subsimplex `i`
/// (quadrature degree 6). `f` returns the form's coefficients at a point.
pub fn canonical_interpolate(
    space: &Arc<CochainSpace>,
    f: &(dyn Fn(&Point) -> Vec<f64> + Sync),
) -> CochainVec {
    let mesh = &space.mesh;
    let n = mesh.dim();
    let k = space.k;
    let values: Vec<f64> = (0..space.dim())
        .into_par_iter()
        .map(|dof| {
            let pts: Vec<Point> = space
                .oriented_face(dof)
                .iter()
                .map(|&v| *mesh.vertex(v))
                .collect();
            integrate_over_simplex(n, k, &pts, 6, f)
        })
        .collect();
    CochainVec {
        space: space.clone(),
        values,
    }
}

/// The discrete de Rham complex of a mesh with lazily assembled operators.
pub struct DiscreteComplex {
    mesh: Arc<SimplicialComplex>,
    bc: Bc,
    seed: u64,
    bary: OnceLock<Vec<Barycentric>>,
    spaces: Vec<OnceLock<Arc<CochainSpace>>>,
    d: Vec<OnceLock<Arc<SparseOperator>>>,
    mass: Vec<OnceLock<Arc<SparseOperator>>>,
    pub(crate) harmonic: Vec<OnceLock<Arc<HarmonicBasis>>>,
}

impl fmt::Debug for DiscreteComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteComplex")
            .field("dim", &self.mesh.dim())
            .field("cells", &self.mesh.num_cells())
            .field("bc", &self.bc)
            .finish()
    }
}

impl DiscreteComplex {
    pub fn new(mesh: Arc<SimplicialComplex>, bc: Bc) -> Self {
        Self::with_seed(mesh, bc, crate::hodge::DEFAULT_SEED)
    }

    /// Complex whose randomized harmonic-form iteration starts from `seed`.
    pub fn with_seed(mesh: Arc<SimplicialComplex>, bc: Bc, seed: u64) -> Self {
        let n = mesh.dim();
        DiscreteComplex {
            mesh,
            bc,
            seed,
            bary: OnceLock::new(),
            spaces: (0..=n).map(|_| OnceLock::new()).collect(),
            d: (0..n).map(|_| OnceLock::new()).collect(),
            mass: (0..=n).map(|_| OnceLock::new()).collect(),
            harmonic: (0..=n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn mesh(&self) -> &Arc<SimplicialComplex> {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn bc(&self) -> Bc {
        self.bc
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k > self.dim() {
            return Err(FeecError::InvalidDegree {
                degree: k,
                dim: self.dim(),
                reason: "form degree exceeds the dimension",
            });
        }
        Ok(())
    }

    pub fn barycentric(&self) -> &[Barycentric] {
        self.bary.get_or_init(|| {
            (0..self.mesh.num_cells())
                .into_par_iter()
                .map(|c| Barycentric::new(self.mesh.dim(), &self.mesh.cell_points(c)))
                .collect()
        })
    }

    pub fn space(&self, k: usize) -> Result<Arc<CochainSpace>> {
        self.check_k(k)?;
        Ok(self.spaces[k]
            .get_or_init(|| {
                Arc::new(make_space(self.mesh.clone(), k, self.bc).expect("valid degree"))
            })
            .clone())
    }

    /// `D^k : V^k -> V^{k+1}`.
    pub fn d(&self, k: usize) -> Result<Arc<SparseOperator>> {
        if k >= self.dim() {
            return Err(FeecError::InvalidDegree {
                degree: k,
                dim: self.dim(),
                reason: "no exterior derivative out of top-degree forms",
            });
        }
        if let Some(op) = self.d[k].get() {
            return Ok(op.clone());
        }
        let op = Arc::new(d_matrix(&self.space(k)?, &self.space(k + 1)?)?);
        Ok(self.d[k].get_or_init(|| op).clone())
    }

    pub fn mass(&self, k: usize) -> Result<Arc<SparseOperator>> {
        self.check_k(k)?;
        if let Some(op) = self.mass[k].get() {
            return Ok(op.clone());
        }
        let op = Arc::new(mass_matrix(&self.space(k)?, self.barycentric()));
        Ok(self.mass[k].get_or_init(|| op).clone())
    }

    pub fn local_basis(&self, k: usize, c: usize) -> Result<Vec<(Option<usize>, PolyForm)>> {
        let space = self.space(k)?;
        Ok(local_basis(&space, &self.barycentric()[c], c))
    }

    /// `Σ_i v_i w_i` on cell `c`.
    pub fn reconstruct(&self, v: &CochainVec, c: usize) -> PolyForm {
        reconstruct(v, &self.barycentric()[c], c)
    }

    pub fn interpolate(
        &self,
        k: usize,
        f: &(dyn Fn(&Point) -> Vec<f64> + Sync),
    ) -> Result<CochainVec> {
        Ok(canonical_interpolate(&self.space(k)?, f))
    }
}

/// `Σ_i v_i w_i` on cell `c` given the cell's barycentric data.
pub fn reconstruct(v: &CochainVec, bary: &Barycentric, c: usize) -> PolyForm {
    let space = &v.space;
    let mut out = PolyForm::zero(space.mesh.dim(), space.k);
    for (dof, w) in local_basis(space, bary, c) {
        if let Some(d) = dof {
            let coef = v.values[d];
            if coef != 0.0 {
                out.axpy(coef, &w);
            }
        }
    }
    out
}
