//! Plain-text `.pmesh` format.
//!
//! ```text
//! nv nc
//! x y            (nv lines)
//! m i1 ... im    (nc lines, zero-based counter-clockwise rings)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{build_mesh, MeshError, Point, PolyMesh};

pub fn format_mesh(mesh: &PolyMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", mesh.n_vertices(), mesh.n_cells());
    // `{:?}` prints the shortest representation that round-trips exactly.
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?}", p[0], p[1]);
    }
    for ring in mesh.cells() {
        let _ = write!(s, "{}", ring.len());
        for v in ring {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    s
}

pub fn parse_mesh(text: &str) -> Result<PolyMesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (_, header) = lines.next().ok_or(MeshError::MissingHeader)?;
    let counts: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| MeshError::MalformedHeader(header.to_string()))?;
    let [nv, nc] = counts[..] else {
        return Err(MeshError::MalformedHeader(header.to_string()));
    };

    let parse_err = |line: usize, message: String| MeshError::Parse { line, message };
    let rest: Vec<(usize, &str)> = lines.collect();

    let mut vertices: Vec<Point> = Vec::with_capacity(nv);
    let mut pos = 0;
    while vertices.len() < nv {
        let Some(&(ln, l)) = rest.get(pos) else { break };
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 {
            // A ring line where a vertex was expected.
            break;
        }
        let x = toks[0].parse::<f64>().map_err(|e| parse_err(ln, format!("'{}': {e}", toks[0])))?;
        let y = toks[1].parse::<f64>().map_err(|e| parse_err(ln, format!("'{}': {e}", toks[1])))?;
        vertices.push([x, y]);
        pos += 1;
    }
    if vertices.len() != nv {
        return Err(MeshError::VertexCountMismatch {
            declared: nv,
            found: vertices.len(),
        });
    }

    let mut cells = Vec::with_capacity(nc);
    for &(ln, l) in &rest[pos..] {
        let toks: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| parse_err(ln, format!("'{t}': {e}"))))
            .collect::<Result<_, _>>()?;
        let (&m, ring) = toks
            .split_first()
            .ok_or_else(|| parse_err(ln, "empty cell line".into()))?;
        if ring.len() != m {
            return Err(parse_err(
                ln,
                format!("cell declares {m} vertices but lists {}", ring.len()),
            ));
        }
        cells.push(ring.to_vec());
    }
    if cells.len() != nc {
        return Err(MeshError::CellCountMismatch {
            declared: nc,
            found: cells.len(),
        });
    }
    build_mesh(vertices, cells)
}

pub fn write_mesh(mesh: &PolyMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    std::fs::write(path, format_mesh(mesh)).map_err(|e| MeshError::Io(e.to_string()))
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<PolyMesh, MeshError> {
    let text = std::fs::read_to_string(path).map_err(|e| MeshError::Io(e.to_string()))?;
    parse_mesh(&text)
}
