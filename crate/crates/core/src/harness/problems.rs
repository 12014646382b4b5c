use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::derham::Bc;
use crate::error::{FeecError, Result};
use crate::estimator::{ExactSolution, ProblemData, SharedForm};
use crate::mesh::{generate, Domain, Point, SimplicialComplex, NO_CELL};
use crate::polyform::alt::star_coeffs;
use crate::polyform::FaceFrame;

/// A manufactured Hodge Laplace problem on a built-in domain.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub domain: Domain,
    pub k: usize,
    pub bc: Bc,
    /// Generator resolution of the coarsest study mesh.
    pub base_resolution: usize,
    pub f: SharedForm,
    pub delta_f: Option<SharedForm>,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("k", &self.k)
            .field("bc", &self.bc)
            .finish_non_exhaustive()
    }
}

fn shared(f: impl Fn(&Point) -> Vec<f64> + Send + Sync + 'static) -> SharedForm {
    Arc::new(f)
}

impl ProblemSpec {
    pub fn n(&self) -> usize {
        self.domain.dim()
    }

    pub fn data(&self) -> ProblemData {
        ProblemData {
            k: self.k,
            bc: self.bc,
            f: self.f.clone(),
            delta_f: self.delta_f.clone(),
            exact: self.exact.clone(),
        }
    }

    pub fn base_mesh(&self) -> Result<SimplicialComplex> {
        generate(self.domain, self.base_resolution)
    }

    /// Check that the exact solution, if any, satisfies the boundary
    /// conditions at the centroids of the boundary faces of the base mesh.
    pub fn validate(&self) -> Result<()> {
        let Some(exact) = &self.exact else {
            return Ok(());
        };
        let mesh = self.base_mesh()?;
        let n = mesh.dim();
        let k = self.k;
        // Forms whose traces must vanish, with their degrees.
        let mut checks: Vec<(&str, &SharedForm, usize, bool)> = Vec::new();
        match self.bc {
            Bc::Natural => {
                if let Some(u) = &exact.u {
                    checks.push(("⋆u", u, k, true));
                }
                if let (Some(du), true) = (&exact.du, k < n) {
                    checks.push(("⋆du", du, k + 1, true));
                }
            }
            Bc::Essential => {
                if let Some(u) = &exact.u {
                    checks.push(("u", u, k, false));
                }
                if let (Some(s), true) = (&exact.sigma, k > 0) {
                    checks.push(("σ", s, k - 1, false));
                }
            }
        }
        for f in 0..mesh.num_faces(n - 1) {
            if mesh.face_cells(f)[1] != NO_CELL {
                continue;
            }
            let pts = mesh.face_points(n - 1, f);
            let frame = FaceFrame::new(n, &pts, &mesh.geometry().face_normal[f]);
            let mut x = [0.0; 3];
            for p in &pts {
                for a in 0..3 {
                    x[a] += p[a] / pts.len() as f64;
                }
            }
            for (label, form, degree, starred) in &checks {
                let mut coef = form(&x);
                let mut j = *degree;
                if *starred {
                    coef = star_coeffs(n, j, &coef);
                    j = n - j;
                }
                if j >= n {
                    continue;
                }
                let tr = frame.pullback_coeffs(j, &coef);
                let size = tr.iter().map(|v| v * v).sum::<f64>().sqrt();
                if size > 1e-8 {
                    return Err(FeecError::InvalidArgument(format!(
                        "problem `{}`: trace of {label} is {size:e} at boundary point {x:?}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

fn neumann_cos(n: usize) -> ProblemSpec {
    let u = move |x: &Point| (0..n).map(|i| (PI * x[i]).cos()).product::<f64>();
    let grad = move |x: &Point| -> Vec<f64> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            -PI * (PI * x[j]).sin()
                        } else {
                            (PI * x[j]).cos()
                        }
                    })
                    .product()
            })
            .collect()
    };
    let lambda = n as f64 * PI * PI;
    let (name, domain, res, description) = if n == 2 {
        (
            "neumann_cos",
            Domain::Square,
            4,
            "scalar Neumann problem, u = cos(πx)cos(πy) on the unit square",
        )
    } else {
        (
            "neumann_cos_3d",
            Domain::Cube,
            2,
            "scalar Neumann problem, u = Π cos(πx_i) on the unit cube",
        )
    };
    ProblemSpec {
        name,
        description,
        domain,
        k: 0,
        bc: Bc::Natural,
        base_resolution: res,
        // u has zero mean, so no compatibility shift is needed.
        f: shared(move |x| vec![lambda * u(x)]),
        delta_f: None,
        exact: Some(ExactSolution {
            u: Some(shared(move |x| vec![u(x)])),
            du: Some(shared(grad)),
            ..Default::default()
        }),
    }
}

fn mixed_dirichlet() -> ProblemSpec {
    // u = φ dx∧dy with φ = e^x sin(πx) sin(πy), so that σ = δu = φ_y dx - φ_x dy.
    let phi = |x: &Point| x[0].exp() * (PI * x[0]).sin() * (PI * x[1]).sin();
    let phi_x =
        |x: &Point| x[0].exp() * ((PI * x[0]).sin() + PI * (PI * x[0]).cos()) * (PI * x[1]).sin();
    let phi_y = |x: &Point| x[0].exp() * (PI * x[0]).sin() * PI * (PI * x[1]).cos();
    let f = |x: &Point| {
        x[0].exp()
            * (PI * x[1]).sin()
            * ((2.0 * PI * PI - 1.0) * (PI * x[0]).sin() - 2.0 * PI * (PI * x[0]).cos())
    };
    ProblemSpec {
        name: "mixed_dirichlet",
        description:
            "top-degree problem (mixed Dirichlet Laplacian), u = e^x sin(πx) sin(πy) dx∧dy",
        domain: Domain::Square,
        k: 2,
        bc: Bc::Natural,
        base_resolution: 4,
        f: shared(move |x| vec![f(x)]),
        delta_f: None,
        exact: Some(ExactSolution {
            u: Some(shared(move |x| vec![phi(x)])),
            sigma: Some(shared(move |x| vec![phi_y(x), -phi_x(x)])),
            dsigma: Some(shared(move |x| vec![f(x)])),
            ..Default::default()
        }),
    }
}

fn vec_laplace_k1() -> ProblemSpec {
    let f = |x: &Point| {
        vec![
            (PI * x[0]).sin() * (PI * x[1]).cos(),
            x[0] * x[2] * x[2],
            x[2].cos() * x[1],
        ]
    };
    let div = |x: &Point| PI * (PI * x[0]).cos() * (PI * x[1]).cos() - x[2].sin() * x[1];
    ProblemSpec {
        name: "vec_laplace_k1",
        description: "vector Laplacian on 1-forms in the unit cube, natural boundary conditions",
        domain: Domain::Cube,
        k: 1,
        bc: Bc::Natural,
        base_resolution: 1,
        f: shared(f),
        delta_f: Some(shared(move |x| vec![-div(x)])),
        exact: None,
    }
}

fn vec_laplace_k2() -> ProblemSpec {
    // Coefficients [dxdy, dxdz, dydz]; the proxy is w = (e^y, -x sin z, y cos πx)
    // and δf = curl w.
    let f = |x: &Point| vec![(PI * x[0]).cos() * x[1], x[2].sin() * x[0], x[1].exp()];
    let curl = |x: &Point| {
        vec![
            (PI * x[0]).cos() + x[0] * x[2].cos(),
            PI * x[1] * (PI * x[0]).sin(),
            -x[2].sin() - x[1].exp(),
        ]
    };
    ProblemSpec {
        name: "vec_laplace_k2",
        description: "vector Laplacian on 2-forms in the unit cube, natural boundary conditions",
        domain: Domain::Cube,
        k: 2,
        bc: Bc::Natural,
        base_resolution: 1,
        f: shared(f),
        delta_f: Some(shared(curl)),
        exact: None,
    }
}

/// `(-(y - c), x - c) / r²` about the axis through `(c, c)`.
fn vortex(x: &Point, c: f64) -> [f64; 2] {
    let (a, b) = (x[0] - c, x[1] - c);
    let r2 = a * a + b * b;
    [-b / r2, a / r2]
}

fn annulus_harmonic() -> ProblemSpec {
    ProblemSpec {
        name: "annulus_harmonic",
        description: "1-form problem on the square annulus; the load has a harmonic component",
        domain: Domain::SquareAnnulus,
        k: 1,
        bc: Bc::Natural,
        base_resolution: 1,
        f: shared(|x| {
            let v = vortex(x, 1.5);
            vec![v[0] + 0.5 * x[0].sin(), v[1] + 0.5 * x[1].cos()]
        }),
        // The vortex is divergence free.
        delta_f: Some(shared(|x| vec![-0.5 * (x[0].cos() - x[1].sin())])),
        exact: None,
    }
}

fn tunnel_harmonic() -> ProblemSpec {
    ProblemSpec {
        name: "tunnel_harmonic",
        description:
            "1-form problem on the cube with a tunnel; the load circulates around the tunnel",
        domain: Domain::CubeWithTunnel,
        k: 1,
        bc: Bc::Natural,
        base_resolution: 1,
        f: shared(|x| {
            let v = vortex(x, 1.5);
            vec![v[0] + 0.3 * x[0], v[1], x[0].sin()]
        }),
        delta_f: Some(shared(|_| vec![-0.3])),
        exact: None,
    }
}

/// Corner singularity `s = r^{2/3} sin(2θ/3)` times the cutoff
/// `χ = (1 - x²)(1 - y²)`, with homogeneous Dirichlet data.
fn lshape_adaptive() -> ProblemSpec {
    fn polar(x: &Point) -> (f64, f64) {
        let r = x[0].hypot(x[1]);
        let mut t = x[1].atan2(x[0]);
        if t < 0.0 {
            t += 2.0 * PI;
        }
        (r, t)
    }
    fn s(x: &Point) -> f64 {
        let (r, t) = polar(x);
        r.powf(2.0 / 3.0) * (2.0 * t / 3.0).sin()
    }
    fn grad_s(x: &Point) -> [f64; 2] {
        let (r, t) = polar(x);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let a = 2.0 / 3.0 * r.powf(-1.0 / 3.0);
        [-a * (t / 3.0).sin(), a * (t / 3.0).cos()]
    }
    fn chi(x: &Point) -> f64 {
        (1.0 - x[0] * x[0]) * (1.0 - x[1] * x[1])
    }
    fn grad_chi(x: &Point) -> [f64; 2] {
        [
            -2.0 * x[0] * (1.0 - x[1] * x[1]),
            -2.0 * x[1] * (1.0 - x[0] * x[0]),
        ]
    }
    let u = |x: &Point| s(x) * chi(x);
    let du = |x: &Point| {
        let (gs, gc) = (grad_s(x), grad_chi(x));
        vec![gs[0] * chi(x) + s(x) * gc[0], gs[1] * chi(x) + s(x) * gc[1]]
    };
    // s is harmonic, so -Δ(sχ) = -(2∇s·∇χ + sΔχ).
    let f = |x: &Point| {
        let (gs, gc) = (grad_s(x), grad_chi(x));
        let lap_chi = -2.0 * (1.0 - x[1] * x[1]) - 2.0 * (1.0 - x[0] * x[0]);
        vec![-(2.0 * (gs[0] * gc[0] + gs[1] * gc[1]) + s(x) * lap_chi)]
    };
    ProblemSpec {
        name: "lshape_adaptive",
        description:
            "Dirichlet problem on the L-shape with the reentrant-corner singularity r^(2/3)",
        domain: Domain::LShape,
        k: 0,
        bc: Bc::Essential,
        base_resolution: 2,
        f: shared(f),
        delta_f: None,
        exact: Some(ExactSolution {
            u: Some(shared(move |x| vec![u(x)])),
            du: Some(shared(du)),
            ..Default::default()
        }),
    }
}

/// Every built-in problem, in a fixed order.
pub fn registry() -> Vec<ProblemSpec> {
    vec![
        neumann_cos(2),
        neumann_cos(3),
        mixed_dirichlet(),
        vec_laplace_k1(),
        vec_laplace_k2(),
        annulus_harmonic(),
        tunnel_harmonic(),
        lshape_adaptive(),
    ]
}

pub fn find_problem(name: &str) -> Result<ProblemSpec> {
    registry()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| FeecError::UnknownProblem(name.to_string()))
}
