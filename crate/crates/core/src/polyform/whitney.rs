use nalgebra::DMatrix;

use super::alt::{elements, subsets};
use super::form::PolyForm;
use super::poly::Poly;
use super::quadrature::simplex_rule;
use crate::mesh::{subsets as index_subsets, Point};

/// Barycentric coordinates of a simplex as affine functions `λ_i = a_i + g_i·x`.
#[derive(Clone, Debug)]
pub struct Barycentric {
    pub n: usize,
    pub consts: Vec<f64>,
    pub grads: Vec<Point>,
}

impl Barycentric {
    pub fn new(n: usize, pts: &[Point]) -> Self {
        let b = DMatrix::from_fn(n, n, |i, j| pts[j + 1][i] - pts[0][i]);
        let inv = b.try_inverse().expect("nondegenerate simplex");
        let mut grads = vec![[0.0; 3]; n + 1];
        let mut consts = vec![0.0; n + 1];
        for j in 1..=n {
            for i in 0..n {
                grads[j][i] = inv[(j - 1, i)];
            }
            consts[j] = -(0..n).map(|i| grads[j][i] * pts[0][i]).sum::<f64>();
        }
        for i in 0..n {
            grads[0][i] = -(1..=n).map(|j| grads[j][i]).sum::<f64>();
        }
        consts[0] = 1.0 - (1..=n).map(|j| consts[j]).sum::<f64>();
        Barycentric { n, consts, grads }
    }

    pub fn lambda(&self, i: usize) -> Poly {
        Poly::affine(self.consts[i], &self.grads[i][..self.n])
    }

    pub fn dlambda(&self, i: usize) -> PolyForm {
        PolyForm::constant(self.n, 1, &self.grads[i][..self.n]).expect("1-form")
    }

    pub fn eval(&self, x: &Point) -> Vec<f64> {
        (0..=self.n)
            .map(|i| self.consts[i] + (0..self.n).map(|a| self.grads[i][a] * x[a]).sum::<f64>())
            .collect()
    }
}

/// Whitney form `k! Σ_j (-1)^j λ_{ρ_j} dλ_{ρ_0} ∧ … (omit j) … ∧ dλ_{ρ_k}`
/// for the ordered local vertex tuple `rho`.
pub fn whitney_form(bary: &Barycentric, rho: &[usize]) -> PolyForm {
    let n = bary.n;
    let k = rho.len() - 1;
    let factorial: f64 = (1..=k).map(|x| x as f64).product();
    let mut w = PolyForm::zero(n, k);
    for j in 0..=k {
        let mut wedge = PolyForm::constant(n, 0, &[1.0]).unwrap();
        for (a, &r) in rho.iter().enumerate() {
            if a != j {
                wedge = wedge.wedge(&bary.dlambda(r)).expect("degree within range");
            }
        }
        let term = wedge
            .mul_poly(&bary.lambda(rho[j]))
            .expect("degree within range");
        let sign = if j % 2 == 0 { factorial } else { -factorial };
        w.axpy(sign, &term);
    }
    w
}

/// Local Whitney basis of degree `k` on the simplex `pts`, one form per
/// `k`-subsimplex in lexicographic order of local vertex positions.
pub fn whitney_basis(n: usize, pts: &[Point], k: usize) -> Vec<PolyForm> {
    let bary = Barycentric::new(n, pts);
    index_subsets(n + 1, k + 1)
        .iter()
        .map(|rho| whitney_form(&bary, rho))
        .collect()
}

fn det(m: &[[f64; 3]], k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => unreachable!(),
    }
}

/// Integral of a `k`-form over the oriented `k`-simplex with vertices `pts`
/// (in order), where `f` returns the form's coefficients at a point.
pub fn integrate_over_simplex(
    n: usize,
    k: usize,
    pts: &[Point],
    degree: usize,
    mut f: impl FnMut(&Point) -> Vec<f64>,
) -> f64 {
    if k == 0 {
        return f(&pts[0])[0];
    }
    // Value of dx_I on the edge vectors (e_1, …, e_k).
    let edges: Vec<Point> = (1..=k)
        .map(|j| {
            [
                pts[j][0] - pts[0][0],
                pts[j][1] - pts[0][1],
                pts[j][2] - pts[0][2],
            ]
        })
        .collect();
    let weights: Vec<f64> = subsets(n, k)
        .iter()
        .map(|&mask| {
            let rows: Vec<usize> = elements(mask).collect();
            let mut m = [[0.0; 3]; 3];
            for (r, &i) in rows.iter().enumerate() {
                for c in 0..k {
                    m[r][c] = edges[c][i];
                }
            }
            det(&m, k)
        })
        .collect();
    let rule = simplex_rule(k, degree);
    let mut s = 0.0;
    for q in 0..rule.len() {
        let x = rule.point(q, pts);
        let c = f(&x);
        s += rule.weight(q) * c.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>();
    }
    let factorial: f64 = (1..=k).map(|x| x as f64).product();
    s / factorial
}

/// Integral of a polynomial form over an oriented subsimplex.
pub fn form_integral(omega: &PolyForm, pts: &[Point]) -> f64 {
    integrate_over_simplex(omega.dim(), omega.degree(), pts, 6, |x| omega.eval(x))
}
