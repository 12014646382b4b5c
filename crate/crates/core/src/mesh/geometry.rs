use super::{Point, SimplicialComplex, NO_CELL};

/// Per-cell and per-facet geometric quantities.
#[derive(Clone, Debug, Default)]
pub struct MeshGeometry {
    /// Cell diameters (longest edge).
    pub h: Vec<f64>,
    pub volume: Vec<f64>,
    pub inradius: Vec<f64>,
    pub shape_ratio: Vec<f64>,
    /// Measure of every `(n-1)`-face.
    pub face_area: Vec<f64>,
    /// Unit normal of every `(n-1)`-face, pointing from the lower-id
    /// neighbour to the higher one (outward on the boundary).
    pub face_normal: Vec<Point>,
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

/// Signed volume of an `n`-simplex given by `n + 1` points.
pub fn signed_volume(dim: usize, pts: &[Point]) -> f64 {
    let e1 = sub(&pts[1], &pts[0]);
    let e2 = sub(&pts[2], &pts[0]);
    match dim {
        2 => 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]),
        3 => {
            let e3 = sub(&pts[3], &pts[0]);
            dot(&e1, &cross(&e2, &e3)) / 6.0
        }
        _ => panic!("signed_volume: unsupported dimension {dim}"),
    }
}

/// Largest pairwise distance between the given points.
pub fn diameter(pts: &[Point]) -> f64 {
    let mut h: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            h = h.max(norm(&sub(&pts[i], &pts[j])));
        }
    }
    h
}

/// Measure of a `k`-simplex embedded in 3-space (`k` = points - 1).
pub fn simplex_measure(pts: &[Point]) -> f64 {
    match pts.len() {
        1 => 1.0,
        2 => norm(&sub(&pts[1], &pts[0])),
        3 => 0.5 * norm(&cross(&sub(&pts[1], &pts[0]), &sub(&pts[2], &pts[0]))),
        4 => signed_volume(3, pts).abs(),
        _ => panic!("simplex_measure: too many points"),
    }
}

/// Unnormalized normal of the hyperplane through an `(n-1)`-simplex.
fn hyperplane_normal(n: usize, pts: &[Point]) -> Point {
    let e1 = sub(&pts[1], &pts[0]);
    if n == 2 {
        [e1[1], -e1[0], 0.0]
    } else {
        cross(&e1, &sub(&pts[2], &pts[0]))
    }
}

/// Whether `p` lies on the closed `(n-1)`-simplex `face` within `tol`.
pub(crate) fn point_in_simplex_face(face: &[Point], p: &Point, n: usize, tol: f64) -> bool {
    let nrm = hyperplane_normal(n, face);
    let len = norm(&nrm);
    let rel = sub(p, &face[0]);
    if (dot(&rel, &nrm) / len).abs() > tol {
        return false;
    }
    let diam = diameter(face);
    let eps = tol / diam.max(1e-300);
    if n == 2 {
        let e = sub(&face[1], &face[0]);
        let t = dot(&rel, &e) / dot(&e, &e);
        return t >= -eps && t <= 1.0 + eps;
    }
    let e1 = sub(&face[1], &face[0]);
    let e2 = sub(&face[2], &face[0]);
    let (a, b, c) = (dot(&e1, &e1), dot(&e1, &e2), dot(&e2, &e2));
    let (r1, r2) = (dot(&rel, &e1), dot(&rel, &e2));
    let det = a * c - b * b;
    let s = (c * r1 - b * r2) / det;
    let t = (a * r2 - b * r1) / det;
    s >= -eps && t >= -eps && s + t <= 1.0 + eps
}

impl MeshGeometry {
    pub(crate) fn compute(mesh: &SimplicialComplex) -> Self {
        let n = mesh.dim();
        let nc = mesh.num_cells();
        let mut g = MeshGeometry {
            h: Vec::with_capacity(nc),
            volume: Vec::with_capacity(nc),
            inradius: Vec::with_capacity(nc),
            shape_ratio: Vec::with_capacity(nc),
            ..Default::default()
        };
        let nf = mesh.num_faces(n - 1);
        g.face_area = (0..nf)
            .map(|f| simplex_measure(&mesh.face_points(n - 1, f)))
            .collect();
        g.face_normal = (0..nf)
            .map(|f| {
                let pts = mesh.face_points(n - 1, f);
                let mut nrm = hyperplane_normal(n, &pts);
                let len = norm(&nrm);
                nrm.iter_mut().for_each(|x| *x /= len);
                let c0 = mesh.face_cells(f)[0];
                debug_assert_ne!(c0, NO_CELL);
                let fv = mesh.face(n - 1, f);
                let opp = *mesh.cell(c0).iter().find(|v| !fv.contains(v)).unwrap();
                if dot(&sub(mesh.vertex(opp), &pts[0]), &nrm) > 0.0 {
                    nrm.iter_mut().for_each(|x| *x = -*x);
                }
                nrm
            })
            .collect();
        for c in 0..nc {
            let pts = mesh.cell_points(c);
            let vol = signed_volume(n, &pts);
            let h = diameter(&pts);
            let area: f64 = mesh
                .cell_face_ids(n - 1, c)
                .iter()
                .map(|&f| g.face_area[f])
                .sum();
            let r = n as f64 * vol / area;
            g.h.push(h);
            g.volume.push(vol);
            g.inradius.push(r);
            g.shape_ratio.push(h / r);
        }
        g
    }
}
