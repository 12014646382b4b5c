use super::alt::{elements, num_components, subsets};
use super::form::PolyForm;
use super::quadrature::simplex_rule;
use crate::error::{FeecError, Result};
use crate::mesh::{simplex_measure, Point};

/// Orthonormal frame of an `(n-1)`-face: origin at the first face vertex,
/// tangents by Gram–Schmidt on the face edges (first edge first), oriented so
/// that `(normal, t_1, …, t_{n-1})` is positively oriented.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceFrame {
    n: usize,
    origin: Point,
    tangents: Vec<Point>,
    normal: Point,
}

fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl FaceFrame {
    /// `pts` are the `n` face vertices, `normal` the unit side normal.
    pub fn new(n: usize, pts: &[Point], normal: &Point) -> Self {
        let mut tangents: Vec<Point> = Vec::with_capacity(n - 1);
        for p in &pts[1..n] {
            let mut t = [p[0] - pts[0][0], p[1] - pts[0][1], p[2] - pts[0][2]];
            for q in &tangents {
                let c = dot(&t, q);
                for a in 0..3 {
                    t[a] -= c * q[a];
                }
            }
            let len = dot(&t, &t).sqrt();
            t.iter_mut().for_each(|x| *x /= len);
            tangents.push(t);
        }
        Self::from_parts(n, pts[0], tangents, *normal)
    }

    /// Frame from explicit orthonormal tangents; the last tangent is flipped
    /// if needed to match the orientation of `normal`.
    pub fn from_parts(n: usize, origin: Point, mut tangents: Vec<Point>, normal: Point) -> Self {
        let det = if n == 2 {
            normal[0] * tangents[0][1] - normal[1] * tangents[0][0]
        } else {
            let c = crate::mesh::cross(&tangents[0], &tangents[1]);
            dot(&normal, &c)
        };
        if det < 0.0 {
            let last = tangents.last_mut().unwrap();
            last.iter_mut().for_each(|x| *x = -*x);
        }
        FaceFrame {
            n,
            origin,
            tangents,
            normal,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn origin(&self) -> &Point {
        &self.origin
    }

    pub fn tangents(&self) -> &[Point] {
        &self.tangents
    }

    pub fn normal(&self) -> &Point {
        &self.normal
    }

    pub fn to_local(&self, x: &Point) -> Point {
        let r = [
            x[0] - self.origin[0],
            x[1] - self.origin[1],
            x[2] - self.origin[2],
        ];
        let mut s = [0.0; 3];
        for (a, t) in self.tangents.iter().enumerate() {
            s[a] = dot(&r, t);
        }
        s
    }

    pub fn to_global(&self, s: &[f64]) -> Point {
        let mut x = self.origin;
        for (a, t) in self.tangents.iter().enumerate() {
            for i in 0..3 {
                x[i] += s[a] * t[i];
            }
        }
        x
    }

    /// Matrix of the pullback on `k`-form coefficients: entry `(I, J)` is
    /// `det T[I, J]` with `T[i][a]` the `i`-th component of tangent `a`.
    /// Stored row-major with `C(n, k)` rows and `C(n-1, k)` columns.
    pub fn pullback_matrix(&self, k: usize) -> Vec<f64> {
        let rows = subsets(self.n, k);
        let cols = subsets(self.n - 1, k);
        let mut m = Vec::with_capacity(rows.len() * cols.len());
        for &ri in rows {
            let ii: Vec<usize> = elements(ri).collect();
            for &cj in cols {
                let jj: Vec<usize> = elements(cj).collect();
                let entry = |r: usize, c: usize| self.tangents[jj[c]][ii[r]];
                let det = match k {
                    0 => 1.0,
                    1 => entry(0, 0),
                    2 => entry(0, 0) * entry(1, 1) - entry(0, 1) * entry(1, 0),
                    _ => unreachable!("traces of forms of degree {k} are not needed"),
                };
                m.push(det);
            }
        }
        m
    }

    /// Pull back the coefficient vector of a `k`-form at a point.
    pub fn pullback_coeffs(&self, k: usize, c: &[f64]) -> Vec<f64> {
        let ncols = num_components(self.n - 1, k);
        let m = self.pullback_matrix(k);
        (0..ncols)
            .map(|j| {
                c.iter()
                    .enumerate()
                    .map(|(i, &ci)| ci * m[i * ncols + j])
                    .sum()
            })
            .collect()
    }
}

/// A form on an `(n-1)`-face written in the face frame's coordinates.
#[derive(Clone, Debug)]
pub struct FaceForm {
    pub face: Option<usize>,
    pub frame: FaceFrame,
    /// The form in `n - 1` local coordinates.
    pub form: PolyForm,
    /// Face vertices in local coordinates.
    pub simplex: Vec<Point>,
}

/// Pull `omega` back to the face with global vertices `pts`.
pub fn trace_to_face(
    omega: &PolyForm,
    frame: &FaceFrame,
    pts: &[Point],
    face: Option<usize>,
) -> Result<FaceForm> {
    let n = omega.dim();
    let k = omega.degree();
    if frame.dim() != n {
        return Err(FeecError::DimensionMismatch(format!(
            "face frame in {} dimensions, form in {n}",
            frame.dim()
        )));
    }
    if k >= n {
        return Err(FeecError::InvalidDegree {
            degree: k,
            dim: n,
            reason: "traces of top-degree forms are not supported",
        });
    }
    let mut map = [[0.0; 3]; 3];
    for (a, t) in frame.tangents().iter().enumerate() {
        for i in 0..3 {
            map[i][a] = t[i];
        }
    }
    let composed: Vec<_> = omega
        .components()
        .iter()
        .map(|p| p.compose_affine(frame.origin(), &map))
        .collect();
    let pb = frame.pullback_matrix(k);
    let ncols = num_components(n - 1, k);
    let mut comps = vec![super::Poly::zero(); ncols];
    for (i, p) in composed.iter().enumerate() {
        for (j, c) in comps.iter_mut().enumerate() {
            let s = pb[i * ncols + j];
            if s != 0.0 {
                c.add_assign(&p.scale(s));
            }
        }
    }
    Ok(FaceForm {
        face,
        frame: frame.clone(),
        form: PolyForm::from_components(n - 1, k, comps)?,
        simplex: pts.iter().map(|p| frame.to_local(p)).collect(),
    })
}

impl FaceForm {
    /// `L2` norm over the face.
    pub fn norm(&self) -> f64 {
        let m = self.form.dim();
        let area = simplex_measure(&self.simplex);
        let rule = simplex_rule(m, 6);
        let mut s = 0.0;
        for q in 0..rule.len() {
            let x = rule.point(q, &self.simplex);
            s += rule.weight(q) * self.form.eval(&x).iter().map(|c| c * c).sum::<f64>();
        }
        (s * area).sqrt()
    }

    /// Integral of a top-degree face form with the frame's orientation.
    pub fn integrate(&self) -> Result<f64> {
        let m = self.form.dim();
        if self.form.degree() != m {
            return Err(FeecError::InvalidDegree {
                degree: self.form.degree(),
                dim: m,
                reason: "only top-degree face forms can be integrated",
            });
        }
        let area = simplex_measure(&self.simplex);
        let rule = simplex_rule(m, 6);
        let mut s = 0.0;
        for q in 0..rule.len() {
            let x = rule.point(q, &self.simplex);
            s += rule.weight(q) * self.form.eval(&x)[0];
        }
        Ok(s * area)
    }

    pub fn wedge(&self, o: &FaceForm) -> Result<FaceForm> {
        Ok(FaceForm {
            face: self.face,
            frame: self.frame.clone(),
            form: self.form.wedge(&o.form)?,
            simplex: self.simplex.clone(),
        })
    }

    pub fn sub(&self, o: &FaceForm) -> FaceForm {
        FaceForm {
            face: self.face,
            frame: self.frame.clone(),
            form: self.form.sub(&o.form),
            simplex: self.simplex.clone(),
        }
    }

    /// Exterior derivative within the face.
    pub fn d(&self) -> Result<FaceForm> {
        Ok(FaceForm {
            face: self.face,
            frame: self.frame.clone(),
            form: self.form.d()?,
            simplex: self.simplex.clone(),
        })
    }
}
