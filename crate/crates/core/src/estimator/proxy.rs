//! Classical vector-calculus form of the indicators in three dimensions.
//!
//! Fields are represented by their scalar or vector proxies: a 1-form by its
//! coefficient vector, a 2-form `a dxdy + b dxdz + c dydz` by `(c, -b, a)`,
//! 0- and 3-forms by a scalar. Under this identification `d` is grad, curl
//! and div, and `δ` is `-div`, curl and `-grad` on 1-, 2- and 3-forms.

use nalgebra::{Matrix3, Matrix4};
use rayon::prelude::*;

use super::local::check_problem;
use super::problem::ProblemData;
use crate::derham::{Bc, CochainVec, DiscreteComplex};
use crate::error::{FeecError, Result};
use crate::hodge::MixedSolution;
use crate::mesh::{Point, SimplicialComplex, NO_CELL};
use crate::polyform::simplex_rule;

const QUAD_DEGREE: usize = 6;

/// Indicators computed through the proxy formulas.
#[derive(Clone, Debug, PartialEq)]
pub struct ProxyIndicators {
    pub eta_m1: Vec<f64>,
    pub eta_0: Vec<f64>,
    pub eta_h_p: Vec<f64>,
}

/// Scalar or vector field `c + G x`.
#[derive(Clone, Debug)]
struct Affine {
    c: Vec<f64>,
    g: Vec<[f64; 3]>,
}

impl Affine {
    fn zero(m: usize) -> Self {
        Affine {
            c: vec![0.0; m],
            g: vec![[0.0; 3]; m],
        }
    }

    fn constant(c: Vec<f64>) -> Self {
        let m = c.len();
        Affine {
            c,
            g: vec![[0.0; 3]; m],
        }
    }

    fn eval(&self, x: &Point) -> Vec<f64> {
        self.c
            .iter()
            .zip(&self.g)
            .map(|(c, g)| c + g[0] * x[0] + g[1] * x[1] + g[2] * x[2])
            .collect()
    }

    fn axpy(&mut self, s: f64, o: &Affine) {
        for i in 0..self.c.len() {
            self.c[i] += s * o.c[i];
            for a in 0..3 {
                self.g[i][a] += s * o.g[i][a];
            }
        }
    }

    fn grad(&self) -> Affine {
        Affine::constant(self.g[0].to_vec())
    }

    fn div(&self) -> Affine {
        Affine::constant(vec![self.g[0][0] + self.g[1][1] + self.g[2][2]])
    }

    fn curl(&self) -> Affine {
        let g = &self.g;
        Affine::constant(vec![
            g[2][1] - g[1][2],
            g[0][2] - g[2][0],
            g[1][0] - g[0][1],
        ])
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `λ_i(x) = a_i + b_i·x` on a tetrahedron.
fn barycentric(pts: &[Point]) -> Vec<(f64, [f64; 3])> {
    let a = Matrix4::from_fn(|j, col| if col == 0 { 1.0 } else { pts[j][col - 1] });
    let inv = a.try_inverse().expect("nondegenerate tetrahedron");
    (0..4)
        .map(|i| (inv[(0, i)], [inv[(1, i)], inv[(2, i)], inv[(3, i)]]))
        .collect()
}

/// Proxy of the Whitney form of the ordered local vertex tuple `rho`.
fn whitney_proxy(lam: &[(f64, [f64; 3])], rho: &[usize]) -> Affine {
    match rho.len() {
        1 => {
            let (a, b) = lam[rho[0]];
            Affine {
                c: vec![a],
                g: vec![b],
            }
        }
        2 => {
            let (ai, bi) = lam[rho[0]];
            let (aj, bj) = lam[rho[1]];
            let mut out = Affine::zero(3);
            for m in 0..3 {
                out.c[m] = ai * bj[m] - aj * bi[m];
                for a in 0..3 {
                    out.g[m][a] = bi[a] * bj[m] - bj[a] * bi[m];
                }
            }
            out
        }
        3 => {
            let [i, j, l] = [rho[0], rho[1], rho[2]];
            let mut out = Affine::zero(3);
            for (s, w) in [
                (i, cross(&lam[j].1, &lam[l].1)),
                (j, cross(&lam[l].1, &lam[i].1)),
                (l, cross(&lam[i].1, &lam[j].1)),
            ] {
                let (a, b) = lam[s];
                for m in 0..3 {
                    out.c[m] += 2.0 * a * w[m];
                    for ax in 0..3 {
                        out.g[m][ax] += 2.0 * b[ax] * w[m];
                    }
                }
            }
            out
        }
        4 => {
            let rows = Matrix3::from_fn(|r, col| lam[rho[r + 1]].1[col]);
            Affine::constant(vec![6.0 * rows.determinant()])
        }
        _ => unreachable!("tuples have 1 to 4 vertices"),
    }
}

/// Proxy of a cochain restricted to cell `c`.
fn cell_proxy(
    mesh: &SimplicialComplex,
    lam: &[(f64, [f64; 3])],
    v: &CochainVec,
    c: usize,
) -> Affine {
    let space = v.space();
    let k = space.degree();
    let cell = mesh.cell(c);
    let m = if k == 0 || k == 3 { 1 } else { 3 };
    let faces: Vec<usize> = if k == 3 {
        vec![c]
    } else {
        mesh.cell_face_ids(k, c).to_vec()
    };
    let mut out = Affine::zero(m);
    for f in faces {
        let Some(dof) = space.dof(f) else { continue };
        let rho: Vec<usize> = space
            .oriented_face(dof)
            .iter()
            .map(|g| {
                cell.iter()
                    .position(|x| x == g)
                    .expect("face vertex lies in the cell")
            })
            .collect();
        out.axpy(v.values()[dof], &whitney_proxy(lam, &rho));
    }
    out
}

/// Coefficients of a `k`-form in the `dx_I` basis to its proxy.
fn to_proxy(k: usize, coef: Vec<f64>) -> Vec<f64> {
    if k == 2 {
        vec![coef[2], -coef[1], coef[0]]
    } else {
        coef
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[derive(Clone, Copy)]
enum Trace {
    Normal,
    Tangential,
    Scalar,
}

struct Geometry<'a> {
    mesh: &'a SimplicialComplex,
    bc: Bc,
}

impl Geometry<'_> {
    fn volume(&self, c: usize) -> f64 {
        let p = self.mesh.cell_points(c);
        let e = |i: usize| [p[i][0] - p[0][0], p[i][1] - p[0][1], p[i][2] - p[0][2]];
        let (a, b, d) = (e(1), e(2), e(3));
        let cr = cross(&b, &d);
        (a[0] * cr[0] + a[1] * cr[1] + a[2] * cr[2]).abs() / 6.0
    }

    fn norm(&self, c: usize, g: impl Fn(&Point) -> Vec<f64>) -> f64 {
        let pts = self.mesh.cell_points(c);
        let rule = simplex_rule(3, QUAD_DEGREE);
        let s: f64 = (0..rule.len())
            .map(|q| rule.weight(q) * g(&rule.point(q, &pts)).iter().map(|v| v * v).sum::<f64>())
            .sum();
        (s * self.volume(c)).sqrt()
    }

    /// Per-cell `‖⟦trace⟧‖_{∂K}` of the field `g(cell, x)`.
    fn jumps(&self, kind: Trace, g: &(dyn Fn(usize, &Point) -> Vec<f64> + Sync)) -> Vec<f64> {
        let mesh = self.mesh;
        let face_sq: Vec<f64> = (0..mesh.num_faces(2))
            .into_par_iter()
            .map(|f| {
                let [c0, c1] = mesh.face_cells(f);
                if c1 == NO_CELL && self.bc == Bc::Essential {
                    return 0.0;
                }
                let pts = mesh.face_points(2, f);
                let e1 = [
                    pts[1][0] - pts[0][0],
                    pts[1][1] - pts[0][1],
                    pts[1][2] - pts[0][2],
                ];
                let e2 = [
                    pts[2][0] - pts[0][0],
                    pts[2][1] - pts[0][1],
                    pts[2][2] - pts[0][2],
                ];
                let nrm = cross(&e1, &e2);
                let len = (nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2]).sqrt();
                let n = nrm.map(|v| v / len);
                let area = 0.5 * len;
                let rule = simplex_rule(2, QUAD_DEGREE);
                let mut s = 0.0;
                for q in 0..rule.len() {
                    let x = rule.point(q, &pts);
                    let mut j = g(c0, &x);
                    if c1 != NO_CELL {
                        j = sub(&j, &g(c1, &x));
                    }
                    let v = match kind {
                        Trace::Scalar => j[0] * j[0],
                        Trace::Normal => {
                            let d = j[0] * n[0] + j[1] * n[1] + j[2] * n[2];
                            d * d
                        }
                        Trace::Tangential => {
                            let t = cross(&n, &[j[0], j[1], j[2]]);
                            t[0] * t[0] + t[1] * t[1] + t[2] * t[2]
                        }
                    };
                    s += rule.weight(q) * v;
                }
                s * area
            })
            .collect();
        (0..mesh.num_cells())
            .map(|c| {
                mesh.cell_face_ids(2, c)
                    .iter()
                    .map(|&f| face_sq[f])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }
}

/// Indicators `η₋₁`, `η₀` and `η_H(p_h)` from the vector-calculus formulas
/// (three dimensions only).
pub fn vector_proxy_indicators(
    cx: &DiscreteComplex,
    problem: &ProblemData,
    sol: &MixedSolution,
) -> Result<ProxyIndicators> {
    let mesh = cx.mesh();
    if mesh.dim() != 3 {
        return Err(FeecError::Unsupported(format!(
            "vector-proxy indicators need a 3D mesh, got dimension {}",
            mesh.dim()
        )));
    }
    check_problem(cx, problem, sol)?;
    let k = sol.k;
    let nc = mesh.num_cells();
    let h = &mesh.geometry().h;
    let geo = Geometry { mesh, bc: cx.bc() };
    let p_cochain = sol.p_cochain();
    let cells: Vec<(Option<Affine>, Affine, Affine)> = (0..nc)
        .into_par_iter()
        .map(|c| {
            let lam = barycentric(&mesh.cell_points(c));
            (
                sol.sigma.as_ref().map(|s| cell_proxy(mesh, &lam, s, c)),
                cell_proxy(mesh, &lam, &sol.u, c),
                cell_proxy(mesh, &lam, &p_cochain, c),
            )
        })
        .collect();
    let sig = |c: usize| cells[c].0.as_ref().expect("sigma exists for k >= 1");
    let u = |c: usize| &cells[c].1;
    let p = |c: usize| &cells[c].2;
    let f = |x: &Point| to_proxy(k, (problem.f)(x));
    let delta_f = if k == 1 || k == 2 {
        Some(problem.require_delta_f(3)?)
    } else {
        None
    };
    let df = |x: &Point| to_proxy(k - 1, (delta_f.expect("k is 1 or 2"))(x));
    let zeros = vec![0.0; nc];
    let combine = |vol: &[f64], jump: &[f64]| -> Vec<f64> {
        (0..nc)
            .map(|c| h[c] * vol[c] + h[c].sqrt() * jump[c])
            .collect()
    };
    let sum2 =
        |a: Vec<f64>, b: Vec<f64>| -> Vec<f64> { a.iter().zip(&b).map(|(x, y)| x + y).collect() };
    let vols = |g: &(dyn Fn(usize) -> f64 + Sync)| -> Vec<f64> {
        (0..nc).into_par_iter().map(g).collect()
    };

    let (eta_m1, eta_0, eta_h_p) = match k {
        0 => {
            let vol = vols(&|c| {
                geo.norm(c, |x| {
                    add(&sub(&f(x), &p(c).eval(x)), &u(c).grad().div().eval(x))
                })
            });
            let jump = geo.jumps(Trace::Normal, &|c, x| u(c).grad().eval(x));
            (zeros.clone(), combine(&vol, &jump), zeros)
        }
        1 => {
            let vol = vols(&|c| geo.norm(c, |x| add(&sig(c).eval(x), &u(c).div().eval(x))));
            let jump = geo.jumps(Trace::Normal, &|c, x| u(c).eval(x));
            let m1 = combine(&vol, &jump);
            let r = |c: usize, x: &Point| sub(&sub(&f(x), &sig(c).grad().eval(x)), &p(c).eval(x));
            let vol0 = vols(&|c| {
                geo.norm(c, |x| sub(&r(c, x), &u(c).curl().curl().eval(x)))
                    + geo.norm(c, |x| {
                        add(
                            &add(&df(x), &sig(c).grad().div().eval(x)),
                            &p(c).div().eval(x),
                        )
                    })
            });
            let jump0 = sum2(
                geo.jumps(Trace::Tangential, &|c, x| u(c).curl().eval(x)),
                geo.jumps(Trace::Normal, &r),
            );
            let volp = vols(&|c| geo.norm(c, |x| p(c).div().eval(x)));
            let jumpp = geo.jumps(Trace::Normal, &|c, x| p(c).eval(x));
            (m1, combine(&vol0, &jump0), combine(&volp, &jumpp))
        }
        2 => {
            let vol = vols(&|c| {
                geo.norm(c, |x| sig(c).div().eval(x))
                    + geo.norm(c, |x| sub(&sig(c).eval(x), &u(c).curl().eval(x)))
            });
            let jump = sum2(
                geo.jumps(Trace::Normal, &|c, x| sig(c).eval(x)),
                geo.jumps(Trace::Tangential, &|c, x| u(c).eval(x)),
            );
            let m1 = combine(&vol, &jump);
            let r = |c: usize, x: &Point| sub(&sub(&f(x), &sig(c).curl().eval(x)), &p(c).eval(x));
            let vol0 = vols(&|c| {
                geo.norm(c, |x| add(&r(c, x), &u(c).div().grad().eval(x)))
                    + geo.norm(c, |x| {
                        sub(
                            &sub(&df(x), &sig(c).curl().curl().eval(x)),
                            &p(c).curl().eval(x),
                        )
                    })
            });
            let jump0 = sum2(
                geo.jumps(Trace::Scalar, &|c, x| u(c).div().eval(x)),
                geo.jumps(Trace::Tangential, &r),
            );
            let volp = vols(&|c| geo.norm(c, |x| p(c).curl().eval(x)));
            let jumpp = geo.jumps(Trace::Tangential, &|c, x| p(c).eval(x));
            (m1, combine(&vol0, &jump0), combine(&volp, &jumpp))
        }
        3 => {
            let vol = vols(&|c| {
                geo.norm(c, |x| sig(c).curl().eval(x))
                    + geo.norm(c, |x| add(&sig(c).eval(x), &u(c).grad().eval(x)))
            });
            let jump = sum2(
                geo.jumps(Trace::Tangential, &|c, x| sig(c).eval(x)),
                geo.jumps(Trace::Scalar, &|c, x| u(c).eval(x)),
            );
            let m1 = combine(&vol, &jump);
            let eta0 = vols(&|c| {
                geo.norm(c, |x| {
                    sub(&sub(&f(x), &sig(c).div().eval(x)), &p(c).eval(x))
                })
            });
            let volp = vols(&|c| geo.norm(c, |x| p(c).grad().eval(x)));
            let jumpp = geo.jumps(Trace::Scalar, &|c, x| p(c).eval(x));
            (m1, eta0, combine(&volp, &jumpp))
        }
        _ => unreachable!("degree checked against the complex"),
    };
    Ok(ProxyIndicators {
        eta_m1,
        eta_0,
        eta_h_p,
    })
}
