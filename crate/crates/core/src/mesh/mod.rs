//! Simplicial complexes in two and three dimensions.
//!
//! A [`SimplicialComplex`] stores the full face lattice of a conforming
//! triangulation. Every `k`-face (`k < n`) is stored as its strictly increasing
//! vertex tuple, and face ids follow the lexicographic order of those tuples.
//! Cells keep the vertex order they were built with, flipped if needed so that
//! every cell is positively oriented. That order doubles as the newest-vertex
//! bisection convention in 2-D: the refinement edge of a triangle is the edge
//! between its first two vertices.

mod generate;
mod geometry;
mod io;
mod refine;

pub use generate::{generate, Domain};
pub(crate) use geometry::cross;
pub use geometry::{diameter, signed_volume, simplex_measure, MeshGeometry};
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};
pub use refine::{refine_bisect, refine_uniform, refine_uniform_with_parents};

use crate::error::{FeecError, Result};

pub type Point = [f64; 3];

/// Sentinel for "no cell" in face-to-cell tables.
pub const NO_CELL: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    dim: usize,
    vertices: Vec<Point>,
    /// Cells in stored (positively oriented) order, stride `dim + 1`.
    cells: Vec<usize>,
    /// `faces[k]`: sorted vertex tuples of all `k`-faces, stride `k + 1`.
    faces: Vec<Vec<usize>>,
    /// `cell_faces[k]`: ids of each cell's local `k`-subsimplices, ordered by
    /// the lexicographic order of local vertex positions.
    cell_faces: Vec<Vec<usize>>,
    /// `boundary[k]` for `k >= 1`: for each `k`-face, its `k + 1` facets and
    /// relative orientation signs (facet omitting local vertex `j` first).
    boundary: Vec<Vec<(usize, i8)>>,
    /// Cells on each side of every `(n-1)`-face: lower id first.
    face_cells: Vec<[usize; 2]>,
    boundary_flags: Vec<Vec<bool>>,
    vertex_cells_ptr: Vec<usize>,
    vertex_cells: Vec<usize>,
    geometry: MeshGeometry,
}

/// All `size`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if size <= n {
        rec(0, n, size, &mut Vec::with_capacity(size), &mut out);
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Sign of the permutation that sorts `v` (entries must be distinct).
pub fn permutation_parity(v: &[usize]) -> i8 {
    let mut inversions = 0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

fn key_of(tuple: &[usize]) -> [usize; 4] {
    let mut key = [0usize; 4];
    key[..tuple.len()].copy_from_slice(tuple);
    key
}

impl SimplicialComplex {
    /// Build the full face lattice from cells and vertex coordinates.
    ///
    /// `coords[i]` holds `dim` coordinates of vertex `i`. Cells with negative
    /// orientation are flipped by swapping their first two vertices.
    pub fn build<C: AsRef<[usize]>>(dim: usize, coords: &[Vec<f64>], cells: &[C]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(FeecError::UnsupportedDimension(dim));
        }
        let mut vertices = Vec::with_capacity(coords.len());
        for (i, c) in coords.iter().enumerate() {
            if c.len() != dim {
                return Err(FeecError::DimensionMismatch(format!(
                    "vertex {i} has {} coordinates, expected {dim}",
                    c.len()
                )));
            }
            let mut p = [0.0; 3];
            p[..dim].copy_from_slice(c);
            vertices.push(p);
        }
        let mut flat = Vec::with_capacity(cells.len() * (dim + 1));
        for (ci, c) in cells.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != dim + 1 {
                return Err(FeecError::InvalidMesh(format!(
                    "cell {ci} has {} vertices, expected {}",
                    c.len(),
                    dim + 1
                )));
            }
            flat.extend_from_slice(c);
        }
        Self::from_flat(dim, vertices, flat)
    }

    pub(crate) fn from_flat(
        dim: usize,
        vertices: Vec<Point>,
        mut cells: Vec<usize>,
    ) -> Result<Self> {
        let nv = vertices.len();
        let stride = dim + 1;
        if cells.is_empty() {
            return Err(FeecError::InvalidMesh("mesh has no cells".into()));
        }
        let ncells = cells.len() / stride;
        let mut used = vec![false; nv];
        for ci in 0..ncells {
            let c = &mut cells[ci * stride..(ci + 1) * stride];
            for (a, &v) in c.iter().enumerate() {
                if v >= nv {
                    return Err(FeecError::InvalidMesh(format!(
                        "cell {ci} references vertex {v}, but only {nv} vertices exist"
                    )));
                }
                if c[..a].contains(&v) {
                    return Err(FeecError::InvalidMesh(format!(
                        "cell {ci} repeats vertex {v}"
                    )));
                }
                used[v] = true;
            }
            let pts: Vec<Point> = c.iter().map(|&v| vertices[v]).collect();
            let vol = signed_volume(dim, &pts);
            let hmax = geometry::diameter(&pts);
            if vol.abs() <= 1e-12 * hmax.powi(dim as i32) {
                return Err(FeecError::DegenerateCell {
                    cell: ci,
                    volume: vol,
                });
            }
            if vol < 0.0 {
                c.swap(0, 1);
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(FeecError::InvalidMesh(format!(
                "vertex {v} is not used by any cell"
            )));
        }

        // Face tables.
        let mut faces: Vec<Vec<usize>> = Vec::with_capacity(dim + 1);
        let mut cell_faces: Vec<Vec<usize>> = Vec::with_capacity(dim + 1);
        for k in 0..=dim {
            let locals = subsets(stride, k + 1);
            if k == dim {
                let mut sorted = Vec::with_capacity(cells.len());
                for ci in 0..ncells {
                    let mut t = cells[ci * stride..(ci + 1) * stride].to_vec();
                    t.sort_unstable();
                    sorted.extend_from_slice(&t);
                }
                faces.push(sorted);
                cell_faces.push((0..ncells).collect());
                continue;
            }
            let mut keys: Vec<[usize; 4]> = Vec::with_capacity(ncells * locals.len());
            for ci in 0..ncells {
                let c = &cells[ci * stride..(ci + 1) * stride];
                for l in &locals {
                    let mut t: Vec<usize> = l.iter().map(|&a| c[a]).collect();
                    t.sort_unstable();
                    keys.push(key_of(&t));
                }
            }
            let mut uniq = keys.clone();
            uniq.sort_unstable();
            uniq.dedup();
            let ids: Vec<usize> = keys
                .iter()
                .map(|key| uniq.binary_search(key).expect("face key present"))
                .collect();
            faces.push(
                uniq.iter()
                    .flat_map(|key| key[..=k].iter().copied())
                    .collect(),
            );
            cell_faces.push(ids);
        }

        let mut mesh = SimplicialComplex {
            dim,
            vertices,
            cells,
            faces,
            cell_faces,
            boundary: Vec::new(),
            face_cells: Vec::new(),
            boundary_flags: Vec::new(),
            vertex_cells_ptr: Vec::new(),
            vertex_cells: Vec::new(),
            geometry: MeshGeometry::default(),
        };
        mesh.build_incidence();
        mesh.build_face_cells()?;
        mesh.build_boundary_flags();
        mesh.build_vertex_cells();
        mesh.check_hanging_vertices()?;
        mesh.geometry = MeshGeometry::compute(&mesh);
        Ok(mesh)
    }

    fn build_incidence(&mut self) {
        let dim = self.dim;
        let mut boundary = vec![Vec::new()];
        for k in 1..=dim {
            let count = self.num_faces(k);
            let mut table = Vec::with_capacity(count * (k + 1));
            for id in 0..count {
                let ordered: Vec<usize> = if k == dim {
                    self.cell(id).to_vec()
                } else {
                    self.face(k, id).to_vec()
                };
                for j in 0..=k {
                    let mut sub: Vec<usize> = ordered
                        .iter()
                        .enumerate()
                        .filter(|&(a, _)| a != j)
                        .map(|(_, &v)| v)
                        .collect();
                    let parity = permutation_parity(&sub);
                    sub.sort_unstable();
                    let sign = if j % 2 == 0 { 1 } else { -1 } * parity;
                    let sub_id = self.find_face(k - 1, &sub).expect("facet of a face exists");
                    table.push((sub_id, sign));
                }
            }
            boundary.push(table);
        }
        self.boundary = boundary;
    }

    fn build_face_cells(&mut self) -> Result<()> {
        let n = self.dim;
        let nf = self.num_faces(n - 1);
        let mut fc = vec![[NO_CELL, NO_CELL]; nf];
        for c in 0..self.num_cells() {
            for &f in self.cell_face_ids(n - 1, c) {
                let slot = &mut fc[f];
                if slot[0] == NO_CELL {
                    slot[0] = c;
                } else if slot[1] == NO_CELL {
                    slot[1] = c;
                } else {
                    return Err(FeecError::NonConforming(format!(
                        "face {:?} is shared by more than two cells ({}, {}, {c})",
                        self.face(n - 1, f),
                        slot[0],
                        slot[1]
                    )));
                }
            }
        }
        self.face_cells = fc;
        Ok(())
    }

    fn build_boundary_flags(&mut self) {
        let n = self.dim;
        let mut flags: Vec<Vec<bool>> = (0..=n).map(|k| vec![false; self.num_faces(k)]).collect();
        for f in 0..self.num_faces(n - 1) {
            if self.face_cells[f][1] != NO_CELL {
                continue;
            }
            let verts = self.face(n - 1, f).to_vec();
            for k in 0..n {
                for l in subsets(n, k + 1) {
                    let t: Vec<usize> = l.iter().map(|&a| verts[a]).collect();
                    let id = self.find_face(k, &t).expect("subface exists");
                    flags[k][id] = true;
                }
            }
        }
        self.boundary_flags = flags;
    }

    fn build_vertex_cells(&mut self) {
        let nv = self.num_vertices();
        let mut counts = vec![0usize; nv + 1];
        for &v in &self.cells {
            counts[v + 1] += 1;
        }
        for i in 0..nv {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut adj = vec![0usize; self.cells.len()];
        for c in 0..self.num_cells() {
            for &v in self.cell(c) {
                adj[fill[v]] = c;
                fill[v] += 1;
            }
        }
        self.vertex_cells_ptr = counts;
        self.vertex_cells = adj;
    }

    /// Reject meshes where a vertex lies on a boundary face it does not
    /// belong to (a hanging vertex seen from the coarse side).
    fn check_hanging_vertices(&self) -> Result<()> {
        let n = self.dim;
        let bfaces: Vec<usize> = (0..self.num_faces(n - 1))
            .filter(|&f| self.face_cells[f][1] == NO_CELL)
            .collect();
        if bfaces.is_empty() {
            return Ok(());
        }
        let bverts: Vec<usize> = (0..self.num_vertices())
            .filter(|&v| self.boundary_flags[0][v])
            .collect();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &v in &bverts {
            for a in 0..n {
                lo[a] = lo[a].min(self.vertices[v][a]);
                hi[a] = hi[a].max(self.vertices[v][a]);
            }
        }
        let mut mean_size = 0.0;
        for &f in &bfaces {
            let pts: Vec<Point> = self
                .face(n - 1, f)
                .iter()
                .map(|&v| self.vertices[v])
                .collect();
            mean_size += geometry::diameter(&pts);
        }
        mean_size /= bfaces.len() as f64;
        let cell = mean_size.max(1e-300);
        let bucket = |p: &Point| -> [i64; 3] {
            let mut b = [0i64; 3];
            for a in 0..n {
                b[a] = ((p[a] - lo[a]) / cell).floor() as i64;
            }
            b
        };
        let mut grid: std::collections::HashMap<[i64; 3], Vec<usize>> =
            std::collections::HashMap::new();
        for &v in &bverts {
            grid.entry(bucket(&self.vertices[v])).or_default().push(v);
        }
        for &f in &bfaces {
            let fv = self.face(n - 1, f);
            let pts: Vec<Point> = fv.iter().map(|&v| self.vertices[v]).collect();
            let diam = geometry::diameter(&pts);
            let mut blo = [f64::INFINITY; 3];
            let mut bhi = [f64::NEG_INFINITY; 3];
            for p in &pts {
                for a in 0..n {
                    blo[a] = blo[a].min(p[a]);
                    bhi[a] = bhi[a].max(p[a]);
                }
            }
            let b0 = bucket(&blo);
            let b1 = bucket(&bhi);
            let (zlo, zhi) = if n == 3 { (b0[2], b1[2]) } else { (0, 0) };
            for i in b0[0]..=b1[0] {
                for j in b0[1]..=b1[1] {
                    for l in zlo..=zhi {
                        let Some(cands) = grid.get(&[i, j, l]) else {
                            continue;
                        };
                        for &v in cands {
                            if fv.contains(&v) {
                                continue;
                            }
                            if geometry::point_in_simplex_face(
                                &pts,
                                &self.vertices[v],
                                n,
                                1e-10 * diam,
                            ) {
                                return Err(FeecError::NonConforming(format!(
                                    "hanging vertex {v} lies on boundary face {:?}",
                                    fv
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn num_faces(&self, k: usize) -> usize {
        self.faces[k].len() / (k + 1)
    }

    pub fn vertex(&self, v: usize) -> &Point {
        &self.vertices[v]
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Cell vertices in stored (positively oriented) order.
    pub fn cell(&self, c: usize) -> &[usize] {
        let s = self.dim + 1;
        &self.cells[c * s..(c + 1) * s]
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cell(c).iter().map(|&v| self.vertices[v]).collect()
    }

    /// Sorted vertex tuple of `k`-face `id`.
    pub fn face(&self, k: usize, id: usize) -> &[usize] {
        &self.faces[k][id * (k + 1)..(id + 1) * (k + 1)]
    }

    pub fn face_points(&self, k: usize, id: usize) -> Vec<Point> {
        self.face(k, id).iter().map(|&v| self.vertices[v]).collect()
    }

    /// Id of the `k`-face with the given vertices (any order).
    pub fn find_face(&self, k: usize, verts: &[usize]) -> Option<usize> {
        if k > self.dim || verts.len() != k + 1 {
            return None;
        }
        let mut t = verts.to_vec();
        t.sort_unstable();
        if k == self.dim {
            // Cells are not sorted by tuple; scan the cells around the first vertex.
            return self
                .vertex_cells(t[0])
                .iter()
                .copied()
                .find(|&c| self.face(k, c) == t.as_slice());
        }
        let table = &self.faces[k];
        let count = table.len() / (k + 1);
        let (mut lo, mut hi) = (0usize, count);
        while lo < hi {
            let mid = (lo + hi) / 2;
            let cand = &table[mid * (k + 1)..(mid + 1) * (k + 1)];
            match cand.cmp(t.as_slice()) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Ids of the local `k`-subsimplices of cell `c`, in the order of
    /// [`subsets`]`(n + 1, k + 1)` applied to the stored vertex order.
    pub fn cell_face_ids(&self, k: usize, c: usize) -> &[usize] {
        let per = binomial(self.dim + 1, k + 1);
        &self.cell_faces[k][c * per..(c + 1) * per]
    }

    /// Facets of `k`-face `id` with incidence signs (`k >= 1`).
    pub fn facets(&self, k: usize, id: usize) -> &[(usize, i8)] {
        &self.boundary[k][id * (k + 1)..(id + 1) * (k + 1)]
    }

    /// Cells adjacent to `(n-1)`-face `f`; the second entry is [`NO_CELL`]
    /// on the boundary.
    pub fn face_cells(&self, f: usize) -> [usize; 2] {
        self.face_cells[f]
    }

    pub fn is_boundary(&self, k: usize, id: usize) -> bool {
        self.boundary_flags[k][id]
    }

    pub fn vertex_cells(&self, v: usize) -> &[usize] {
        &self.vertex_cells[self.vertex_cells_ptr[v]..self.vertex_cells_ptr[v + 1]]
    }

    pub fn geometry(&self) -> &MeshGeometry {
        &self.geometry
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.dim)
            .map(|k| {
                let c = self.num_faces(k) as i64;
                if k % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .sum()
    }

    /// The patch of cells sharing at least one vertex with `cell`, sorted.
    pub fn element_patch(&self, cell: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .cell(cell)
            .iter()
            .flat_map(|&v| self.vertex_cells(v).iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Vertex coordinates as `dim`-length vectors.
    pub fn coords(&self) -> Vec<Vec<f64>> {
        self.vertices
            .iter()
            .map(|p| p[..self.dim].to_vec())
            .collect()
    }

    /// Cells as vertex lists in stored order.
    pub fn cell_list(&self) -> Vec<Vec<usize>> {
        (0..self.num_cells())
            .map(|c| self.cell(c).to_vec())
            .collect()
    }

    pub fn h_max(&self) -> f64 {
        self.geometry.h.iter().copied().fold(0.0, f64::max)
    }
}
