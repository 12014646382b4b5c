//! Simplex quadrature by collapsed (conical product) Gauss–Jacobi rules.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::mesh::Point;

/// Quadrature rule on a `dim`-simplex with barycentric nodes and weights
/// summing to one (integrals are `|K| Σ w_q f(x_q)`).
#[derive(Clone, Debug)]
pub struct QuadRule {
    dim: usize,
    degree: usize,
    bary: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn bary(&self, q: usize) -> &[f64] {
        &self.bary[q * (self.dim + 1)..(q + 1) * (self.dim + 1)]
    }

    pub fn weight(&self, q: usize) -> f64 {
        self.weights[q]
    }

    /// Physical node `q` on the simplex with the given vertices.
    pub fn point(&self, q: usize, verts: &[Point]) -> Point {
        let b = self.bary(q);
        let mut x = [0.0; 3];
        for (bi, v) in b.iter().zip(verts) {
            for a in 0..3 {
                x[a] += bi * v[a];
            }
        }
        x
    }
}

/// Gauss–Jacobi nodes and weights on `[0, 1]` for the weight `(1 - t)^alpha`,
/// by the Golub–Welsch eigenvalue method.
pub fn gauss_jacobi_01(m: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = (alpha, 0.0);
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let nf = i as f64;
        let s = 2.0 * nf + a + b;
        jac[(i, i)] = if i == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if i + 1 < m {
            let k = nf + 1.0;
            let s1 = 2.0 * k + a + b;
            let off = (4.0 * k * (k + a) * (k + b) * (k + a + b)
                / (s1 * s1 * (s1 + 1.0) * (s1 - 1.0)))
                .sqrt();
            jac[(i, i + 1)] = off;
            jac[(i + 1, i)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (0.5 * (1.0 + eig.eigenvalues[i]), v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    (
        pairs.iter().map(|p| p.0).collect(),
        pairs.iter().map(|p| p.1 / total).collect(),
    )
}

fn build_rule(dim: usize, degree: usize) -> QuadRule {
    if dim == 0 {
        return QuadRule {
            dim,
            degree,
            bary: vec![1.0],
            weights: vec![1.0],
        };
    }
    let m = (degree + 2) / 2;
    // Direction j carries the Jacobian factor (1 - t_j)^(dim - 1 - j).
    let lines: Vec<(Vec<f64>, Vec<f64>)> = (0..dim)
        .map(|j| gauss_jacobi_01(m, (dim - 1 - j) as f64))
        .collect();
    let mut bary = Vec::new();
    let mut weights = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let mut w = 1.0;
        let mut remaining = 1.0;
        let mut coords = Vec::with_capacity(dim);
        for j in 0..dim {
            let t = lines[j].0[idx[j]];
            w *= lines[j].1[idx[j]];
            coords.push(remaining * t);
            remaining *= 1.0 - t;
        }
        bary.push(1.0 - coords.iter().sum::<f64>());
        bary.extend_from_slice(&coords);
        weights.push(w);
        let mut j = dim;
        loop {
            if j == 0 {
                let total: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w /= total);
                return QuadRule {
                    dim,
                    degree,
                    bary,
                    weights,
                };
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < m {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Rule on the `dim`-simplex exact for polynomials of degree `degree`.
pub fn simplex_rule(dim: usize, degree: usize) -> &'static QuadRule {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), &'static QuadRule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry((dim, degree))
        .or_insert_with(|| Box::leak(Box::new(build_rule(dim, degree))))
}
