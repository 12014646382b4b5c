//! ASCII mesh files.
//!
//! ```text
//! feecmesh 1 <dim>
//! vertices <N>
//! <dim floats per line>
//! cells <M>
//! <dim+1 vertex ids per line>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::SimplicialComplex;
use crate::error::{FeecError, Result};
use crate::numfmt::fmt_f64;

pub fn write_mesh_string(mesh: &SimplicialComplex) -> String {
    let n = mesh.dim();
    let mut s = String::new();
    writeln!(s, "feecmesh 1 {n}").unwrap();
    writeln!(s, "vertices {}", mesh.num_vertices()).unwrap();
    for p in mesh.vertices() {
        let line: Vec<String> = p[..n].iter().map(|&x| fmt_f64(x)).collect();
        writeln!(s, "{}", line.join(" ")).unwrap();
    }
    writeln!(s, "cells {}", mesh.num_cells()).unwrap();
    for c in 0..mesh.num_cells() {
        let line: Vec<String> = mesh.cell(c).iter().map(|v| v.to_string()).collect();
        writeln!(s, "{}", line.join(" ")).unwrap();
    }
    s
}

pub fn write_mesh(mesh: &SimplicialComplex, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_mesh_string(mesh)).map_err(|e| FeecError::io(path, e))
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<SimplicialComplex> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| FeecError::io(path, e))?;
    read_mesh_str(&text, &path.display().to_string())
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    source: &'a str,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line, tokenized.
    fn next(&mut self, expecting: &str) -> Result<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if !toks.is_empty() {
                return Ok((i + 1, toks));
            }
        }
        Err(self.err(
            self.last + 1,
            format!("unexpected end of file: missing {expecting}"),
        ))
    }

    fn err(&self, line: usize, msg: String) -> FeecError {
        FeecError::Parse {
            path: self.source.to_string(),
            line,
            msg,
        }
    }
}

/// Parse a mesh from text; `source` names the input in error messages.
pub fn read_mesh_str(text: &str, source: &str) -> Result<SimplicialComplex> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        source,
        last: 0,
    };
    let (ln, header) = lines.next("`feecmesh` header")?;
    if header.len() != 3 || header[0] != "feecmesh" {
        return Err(lines.err(ln, "expected header `feecmesh 1 <dim>`".into()));
    }
    if header[1] != "1" {
        return Err(lines.err(ln, format!("unsupported format version `{}`", header[1])));
    }
    let dim: usize = header[2]
        .parse()
        .map_err(|_| lines.err(ln, format!("invalid dimension `{}`", header[2])))?;
    if dim != 2 && dim != 3 {
        return Err(FeecError::UnsupportedDimension(dim));
    }

    let count = |lines: &Lines, ln: usize, toks: &[&str], key: &str| -> Result<usize> {
        if toks.len() != 2 || toks[0] != key {
            return Err(lines.err(ln, format!("expected `{key} <count>`")));
        }
        toks[1]
            .parse()
            .map_err(|_| lines.err(ln, format!("invalid {key} count `{}`", toks[1])))
    };

    let (ln, toks) = lines.next("`vertices` section")?;
    let nv = count(&lines, ln, &toks, "vertices")?;
    let mut coords = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, toks) = lines.next("vertex coordinates")?;
        if toks.len() != dim {
            return Err(FeecError::DimensionMismatch(format!(
                "{source}:{ln}: vertex has {} coordinates, expected {dim}",
                toks.len()
            )));
        }
        let p = toks
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| lines.err(ln, format!("invalid coordinate `{t}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        coords.push(p);
    }

    let (ln, toks) = lines.next("`cells` section")?;
    let nc = count(&lines, ln, &toks, "cells")?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, toks) = lines.next("cell vertex ids")?;
        if toks.len() != dim + 1 {
            return Err(FeecError::DimensionMismatch(format!(
                "{source}:{ln}: cell has {} vertices, expected {}",
                toks.len(),
                dim + 1
            )));
        }
        let c = toks
            .iter()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| lines.err(ln, format!("invalid vertex id `{t}`")))
            })
            .collect::<Result<Vec<usize>>>()?;
        cells.push(c);
    }
    if let Ok((ln, _)) = lines.next("") {
        return Err(lines.err(ln, "trailing data after cells section".into()));
    }
    SimplicialComplex::build(dim, &coords, &cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, refine_uniform, Domain};

    #[test]
    fn round_trip_preserves_cells_and_vertices() {
        let m = refine_uniform(&generate(Domain::Square, 1).unwrap());
        let text = write_mesh_string(&m);
        let back = read_mesh_str(&text, "mem").unwrap();
        assert_eq!(back.cell_list(), m.cell_list());
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(write_mesh_string(&back), text);
    }

    #[test]
    fn truncated_file_names_missing_section() {
        let err = read_mesh_str("feecmesh 1 2\nvertices 3\n0 0\n1 0\n0 1\n", "t.mesh").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cells"), "{msg}");
        assert!(msg.starts_with("t.mesh:"), "{msg}");
    }

    #[test]
    fn dimension_four_is_unsupported() {
        let err = read_mesh_str("feecmesh 1 4\n", "x").unwrap_err();
        assert!(matches!(err, FeecError::UnsupportedDimension(4)));
    }

    #[test]
    fn coordinate_count_mismatch() {
        let err = read_mesh_str("feecmesh 1 2\nvertices 1\n0 0 0\n", "x").unwrap_err();
        assert!(matches!(err, FeecError::DimensionMismatch(_)));
    }
}
