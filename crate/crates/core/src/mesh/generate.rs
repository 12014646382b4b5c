use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{Point, SimplicialComplex};
use crate::error::{FeecError, Result};

/// Built-in test domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    /// `[0,1]^2`
    Square,
    /// `[-1,1]^2` minus `[0,1] x [-1,0]`
    LShape,
    /// `[0,3]^2` minus the open square `(1,2)^2`
    SquareAnnulus,
    /// `[0,1]^3`
    Cube,
    /// `[0,3]^3` minus the open prism `(1,2)^2 x (0,3)`
    CubeWithTunnel,
}

impl Domain {
    pub const ALL: [Domain; 5] = [
        Domain::Square,
        Domain::LShape,
        Domain::SquareAnnulus,
        Domain::Cube,
        Domain::CubeWithTunnel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Domain::Square => "square",
            Domain::LShape => "l_shape",
            Domain::SquareAnnulus => "square_annulus",
            Domain::Cube => "cube",
            Domain::CubeWithTunnel => "cube_with_tunnel",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Domain::Square | Domain::LShape | Domain::SquareAnnulus => 2,
            Domain::Cube | Domain::CubeWithTunnel => 3,
        }
    }

    /// Betti numbers `b_0..b_n` of the domain.
    pub fn betti(self) -> Vec<usize> {
        match self {
            Domain::Square | Domain::LShape => vec![1, 0, 0],
            Domain::SquareAnnulus => vec![1, 1, 0],
            Domain::Cube => vec![1, 0, 0, 0],
            Domain::CubeWithTunnel => vec![1, 1, 0, 0],
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = FeecError;

    fn from_str(s: &str) -> Result<Self> {
        Domain::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| FeecError::UnknownDomain(s.to_string()))
    }
}

/// Generate a conforming mesh of `domain`.
///
/// `resolution` is the number of grid intervals per unit length, so the
/// square and cube have `resolution` intervals per side and the annulus and
/// tunnel domains `3 * resolution`.
pub fn generate(domain: Domain, resolution: usize) -> Result<SimplicialComplex> {
    if resolution == 0 {
        return Err(FeecError::InvalidArgument(
            "resolution must be at least 1".into(),
        ));
    }
    let r = resolution as i64;
    match domain {
        Domain::Square => grid_2d(r, [0, 0], r, |_, _| true),
        Domain::LShape => grid_2d(2 * r, [-r, -r], r, |i, j| !(i >= r && j < r)),
        Domain::SquareAnnulus => grid_2d(3 * r, [0, 0], r, |i, j| {
            !((r..2 * r).contains(&i) && (r..2 * r).contains(&j))
        }),
        Domain::Cube => grid_3d(r, r, |_, _, _| true),
        Domain::CubeWithTunnel => grid_3d(3 * r, r, |i, j, _| {
            !((r..2 * r).contains(&i) && (r..2 * r).contains(&j))
        }),
    }
}

/// Collects integer grid points and maps them to compact vertex ids in
/// lexicographic grid order.
struct GridVertices<const D: usize> {
    ids: BTreeMap<[i64; D], usize>,
}

impl<const D: usize> GridVertices<D> {
    fn new() -> Self {
        GridVertices {
            ids: BTreeMap::new(),
        }
    }

    fn touch(&mut self, p: [i64; D]) {
        self.ids.insert(p, 0);
    }

    fn finish(&mut self, origin: [i64; D], scale: i64) -> Vec<Point> {
        let mut pts = Vec::with_capacity(self.ids.len());
        for (i, (key, id)) in self.ids.iter_mut().enumerate() {
            *id = i;
            let mut p = [0.0; 3];
            for a in 0..D {
                p[a] = (key[a] + origin[a]) as f64 / scale as f64;
            }
            pts.push(p);
        }
        pts
    }

    fn id(&self, p: [i64; D]) -> usize {
        self.ids[&p]
    }
}

/// `m x m` grid of squares with spacing `1/scale` starting at `origin/scale`.
/// Each square `(a, b, c, d)` (counter-clockwise from its lower-left corner)
/// is split along `a-c`; triangles list the diagonal first so the first edge
/// is the longest one.
fn grid_2d(
    m: i64,
    origin: [i64; 2],
    scale: i64,
    keep: impl Fn(i64, i64) -> bool,
) -> Result<SimplicialComplex> {
    let mut squares = Vec::new();
    let mut verts = GridVertices::<2>::new();
    for j in 0..m {
        for i in 0..m {
            if keep(i, j) {
                squares.push((i, j));
                for (di, dj) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
                    verts.touch([i + di, j + dj]);
                }
            }
        }
    }
    let pts = verts.finish(origin, scale);
    let mut cells = Vec::with_capacity(squares.len() * 6);
    for (i, j) in squares {
        let a = verts.id([i, j]);
        let b = verts.id([i + 1, j]);
        let c = verts.id([i + 1, j + 1]);
        let d = verts.id([i, j + 1]);
        cells.extend_from_slice(&[c, a, b, a, c, d]);
    }
    SimplicialComplex::from_flat(2, pts, cells)
}

/// `m^3` grid of cubes with spacing `1/scale`, each split into the six Kuhn
/// tetrahedra around its main diagonal.
fn grid_3d(m: i64, scale: i64, keep: impl Fn(i64, i64, i64) -> bool) -> Result<SimplicialComplex> {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut cubes = Vec::new();
    let mut verts = GridVertices::<3>::new();
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                if keep(i, j, k) {
                    cubes.push([i, j, k]);
                    for c in 0..8 {
                        verts.touch([i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1)]);
                    }
                }
            }
        }
    }
    let pts = verts.finish([0, 0, 0], scale);
    let mut cells = Vec::with_capacity(cubes.len() * 24);
    for base in cubes {
        for perm in PERMS {
            let mut p = base;
            cells.push(verts.id(p));
            for &axis in &perm {
                p[axis] += 1;
                cells.push(verts.id(p));
            }
        }
    }
    SimplicialComplex::from_flat(3, pts, cells)
}
