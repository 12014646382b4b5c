use std::collections::BTreeSet;

use super::{Point, SimplicialComplex};
use crate::error::{FeecError, Result};

fn midpoint(a: &Point, b: &Point) -> Point {
    [
        0.5 * (a[0] + b[0]),
        0.5 * (a[1] + b[1]),
        0.5 * (a[2] + b[2]),
    ]
}

/// Uniform refinement: red refinement in 2-D, Bey-type 8-way splitting in 3-D.
pub fn refine_uniform(mesh: &SimplicialComplex) -> SimplicialComplex {
    refine_uniform_with_parents(mesh).0
}

/// Uniform refinement that also returns the parent cell of every child.
///
/// New vertices are the edge midpoints, numbered after the old vertices in
/// edge-id order. In 3-D the inner octahedron is split along its shortest
/// diagonal (ties go to the first of `x01-x23`, `x02-x13`, `x03-x12`).
pub fn refine_uniform_with_parents(mesh: &SimplicialComplex) -> (SimplicialComplex, Vec<usize>) {
    let n = mesh.dim();
    let nv = mesh.num_vertices();
    let mut pts: Vec<Point> = mesh.vertices().to_vec();
    for e in 0..mesh.num_faces(1) {
        let [a, b] = [mesh.face(1, e)[0], mesh.face(1, e)[1]];
        pts.push(midpoint(mesh.vertex(a), mesh.vertex(b)));
    }
    let per = if n == 2 { 4 } else { 8 };
    let mut cells = Vec::with_capacity(mesh.num_cells() * per * (n + 1));
    let mut parents = Vec::with_capacity(mesh.num_cells() * per);
    for c in 0..mesh.num_cells() {
        let x = mesh.cell(c);
        // Local edges in the order (01, 02, 03, 12, 13, 23) or (01, 02, 12).
        let edge_ids = mesh.cell_face_ids(1, c);
        let mid = |a: usize, b: usize| -> usize {
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            let local = if n == 2 {
                match (a, b) {
                    (0, 1) => 0,
                    (0, 2) => 1,
                    _ => 2,
                }
            } else {
                match (a, b) {
                    (0, 1) => 0,
                    (0, 2) => 1,
                    (0, 3) => 2,
                    (1, 2) => 3,
                    (1, 3) => 4,
                    _ => 5,
                }
            };
            nv + edge_ids[local]
        };
        if n == 2 {
            let (m01, m02, m12) = (mid(0, 1), mid(0, 2), mid(1, 2));
            cells.extend_from_slice(&[x[0], m01, m02]);
            cells.extend_from_slice(&[m01, x[1], m12]);
            cells.extend_from_slice(&[m02, m12, x[2]]);
            cells.extend_from_slice(&[m12, m02, m01]);
        } else {
            let m = |a, b| mid(a, b);
            cells.extend_from_slice(&[x[0], m(0, 1), m(0, 2), m(0, 3)]);
            cells.extend_from_slice(&[m(0, 1), x[1], m(1, 2), m(1, 3)]);
            cells.extend_from_slice(&[m(0, 2), m(1, 2), x[2], m(2, 3)]);
            cells.extend_from_slice(&[m(0, 3), m(1, 3), m(2, 3), x[3]]);
            let diagonals = [
                (m(0, 1), m(2, 3), [m(0, 2), m(0, 3), m(1, 3), m(1, 2)]),
                (m(0, 2), m(1, 3), [m(0, 1), m(0, 3), m(2, 3), m(1, 2)]),
                (m(0, 3), m(1, 2), [m(0, 1), m(0, 2), m(2, 3), m(1, 3)]),
            ];
            let len = |a: usize, b: usize| {
                let (p, q) = (&pts[a], &pts[b]);
                (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)
            };
            let mut best = 0;
            for d in 1..3 {
                if len(diagonals[d].0, diagonals[d].1)
                    < len(diagonals[best].0, diagonals[best].1) * (1.0 - 1e-12)
                {
                    best = d;
                }
            }
            let (a, b, ring) = diagonals[best];
            for i in 0..4 {
                cells.extend_from_slice(&[a, b, ring[i], ring[(i + 1) % 4]]);
            }
        }
        parents.extend(std::iter::repeat_n(c, per));
    }
    let refined = SimplicialComplex::from_flat(n, pts, cells)
        .expect("uniform refinement preserves conformity");
    (refined, parents)
}

/// Newest-vertex bisection of the marked cells with conformity closure (2-D only).
///
/// The refinement edge of a triangle `(v0, v1, v2)` is `v0-v1`; bisecting it at
/// the midpoint `m` yields `(v2, v0, m)` and `(v1, v2, m)`.
pub fn refine_bisect(mesh: &SimplicialComplex, marked: &[usize]) -> Result<SimplicialComplex> {
    if mesh.dim() != 2 {
        return Err(FeecError::Unsupported(
            "newest-vertex bisection is only available in 2-D".into(),
        ));
    }
    if marked.is_empty() {
        return Err(FeecError::InvalidArgument(
            "no cells marked for refinement".into(),
        ));
    }
    let nc = mesh.num_cells();
    if let Some(&bad) = marked.iter().find(|&&c| c >= nc) {
        return Err(FeecError::InvalidArgument(format!(
            "marked cell {bad} does not exist"
        )));
    }
    let refinement_edge = |c: usize| mesh.find_face(1, &mesh.cell(c)[..2]).expect("edge exists");
    let mut edge_marked = vec![false; mesh.num_faces(1)];
    for &c in marked {
        edge_marked[refinement_edge(c)] = true;
    }
    // Closure: a cell with any marked edge must bisect its refinement edge.
    let mut queue: Vec<usize> = (0..mesh.num_faces(1)).filter(|&e| edge_marked[e]).collect();
    while let Some(e) = queue.pop() {
        let verts = mesh.face(1, e);
        let cells: BTreeSet<usize> = mesh
            .vertex_cells(verts[0])
            .iter()
            .copied()
            .filter(|&c| mesh.cell(c).contains(&verts[1]))
            .collect();
        for c in cells {
            let r = refinement_edge(c);
            if !edge_marked[r] {
                edge_marked[r] = true;
                queue.push(r);
            }
        }
    }

    let nv = mesh.num_vertices();
    let mut pts: Vec<Point> = mesh.vertices().to_vec();
    let mut midpoint_of = vec![usize::MAX; mesh.num_faces(1)];
    for e in 0..mesh.num_faces(1) {
        if edge_marked[e] {
            let v = mesh.face(1, e);
            midpoint_of[e] = nv + (pts.len() - nv);
            pts.push(midpoint(mesh.vertex(v[0]), mesh.vertex(v[1])));
        }
    }
    let mid = |a: usize, b: usize| -> Option<usize> {
        if a >= nv || b >= nv {
            return None;
        }
        let e = mesh.find_face(1, &[a, b])?;
        edge_marked[e].then(|| midpoint_of[e])
    };
    fn bisect(tri: [usize; 3], mid: &dyn Fn(usize, usize) -> Option<usize>, out: &mut Vec<usize>) {
        match mid(tri[0], tri[1]) {
            Some(m) => {
                bisect([tri[2], tri[0], m], mid, out);
                bisect([tri[1], tri[2], m], mid, out);
            }
            None => out.extend_from_slice(&tri),
        }
    }
    let mut cells = Vec::with_capacity(nc * 6);
    for c in 0..nc {
        let x = mesh.cell(c);
        bisect([x[0], x[1], x[2]], &mid, &mut cells);
    }
    SimplicialComplex::from_flat(2, pts, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, Domain};

    fn total_volume(m: &SimplicialComplex) -> f64 {
        m.geometry().volume.iter().sum()
    }

    #[test]
    fn red_refinement_quadruples() {
        let m = generate(Domain::Square, 1).unwrap();
        let (f, parents) = refine_uniform_with_parents(&m);
        assert_eq!(f.num_cells(), 8);
        assert_eq!(parents, vec![0, 0, 0, 0, 1, 1, 1, 1]);
        assert!((total_volume(&f) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tetrahedron_splits_into_eight() {
        let coords = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let m = SimplicialComplex::build(3, &coords, &[vec![0, 1, 2, 3]]).unwrap();
        let f = refine_uniform(&m);
        assert_eq!(f.num_cells(), 8);
        assert!((total_volume(&f) - 1.0 / 6.0).abs() < 1e-14 / 6.0);
        for c in 0..8 {
            assert!((f.geometry().volume[c] - 1.0 / 48.0).abs() < 1e-15);
        }
    }

    #[test]
    fn bisect_both_cells_of_square() {
        let m = generate(Domain::Square, 1).unwrap();
        let f = refine_bisect(&m, &[0, 1]).unwrap();
        assert_eq!(f.num_cells(), 4);
    }

    #[test]
    fn bisect_one_cell_closes_conformingly() {
        let m = refine_uniform(&generate(Domain::Square, 1).unwrap());
        let f = refine_bisect(&m, &[3]).unwrap();
        assert!(f.num_cells() > m.num_cells());
        // Rebuilding from raw lists reruns every conformity check.
        SimplicialComplex::build(2, &f.coords(), &f.cell_list()).unwrap();
    }

    #[test]
    fn bisect_rejects_3d() {
        let m = generate(Domain::Cube, 1).unwrap();
        assert!(matches!(
            refine_bisect(&m, &[0]),
            Err(FeecError::Unsupported(_))
        ));
    }
}
