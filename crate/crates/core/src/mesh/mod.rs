//! Polygonal meshes of planar domains.
//!
//! A [`PolyMesh`] stores vertex coordinates and counter-clockwise vertex
//! rings, and derives the edge topology (unique vertex pairs with their
//! adjacent cells) together with boundary flags for vertices and edges.

mod generate;
mod geometry;
mod io;
mod regularity;
mod voronoi;

pub use generate::{generate, MeshKind};
pub use geometry::{element_geometry, signed_area, EdgeGeometry, ElementGeometry};
pub use io::{read_mesh, write_mesh, parse_mesh, format_mesh};
pub use regularity::{regularity_report, RegularityReport};

use std::collections::HashMap;

use thiserror::Error;

/// A point of the plane.
pub type Point = [f64; 2];

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("out-of-range index {index} in cell {cell} ({n_vertices} vertices defined)")]
    IndexOutOfRange {
        cell: usize,
        index: usize,
        n_vertices: usize,
    },
    #[error("cell {cell} has fewer than 3 vertices")]
    TooFewVertices { cell: usize },
    #[error("cell {cell} repeats vertex {vertex}")]
    RepeatedVertex { cell: usize, vertex: usize },
    #[error("cell {cell} has zero area")]
    ZeroArea { cell: usize },
    #[error("edge ({0}, {1}) is shared by more than two cells")]
    OverSharedEdge(usize, usize),
    #[error("edge ({0}, {1}) is traversed in the same direction by two cells")]
    InconsistentOrientation(usize, usize),
    #[error("vertices {0} and {1} coincide")]
    CoincidentVertices(usize, usize),
    #[error("vertex {0} is not referenced by any cell")]
    UnreferencedVertex(usize),
    #[error("mesh has no cells")]
    Empty,
    #[error("subdivision count must be at least 1, got {0}")]
    InvalidSubdivision(usize),
    #[error("missing header")]
    MissingHeader,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("vertex count mismatch: header declares {declared}, found {found}")]
    VertexCountMismatch { declared: usize, found: usize },
    #[error("cell count mismatch: header declares {declared}, found {found}")]
    CellCountMismatch { declared: usize, found: usize },
    #[error("parse failure on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// An edge as an unordered vertex pair (stored low index first) with its
/// adjacent cells. `cells[1]` is `None` for boundary edges.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshEdge {
    pub vertices: [usize; 2],
    pub cells: [Option<usize>; 2],
}

impl MeshEdge {
    pub fn is_boundary(&self) -> bool {
        self.cells[1].is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    edges: Vec<MeshEdge>,
    /// Local edge `i` of a cell joins `ring[i]` and `ring[i + 1]`.
    cell_edges: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
}

impl PolyMesh {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    pub fn cell_edges(&self, cell: usize) -> &[usize] {
        &self.cell_edges[cell]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edges[e].is_boundary()
    }

    pub fn n_interior_vertices(&self) -> usize {
        self.boundary_vertex.iter().filter(|b| !**b).count()
    }

    /// Shoelace area of a cell.
    pub fn cell_area(&self, cell: usize) -> f64 {
        signed_area(self.cells[cell].iter().map(|&v| self.vertices[v]))
    }

    /// Largest element diameter.
    pub fn max_diameter(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| element_geometry(self, c).diameter)
            .fold(0.0, f64::max)
    }
}

/// Builds a mesh from vertex coordinates and cell rings, deriving the edge
/// topology. Clockwise rings are reoriented.
pub fn build_mesh(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<PolyMesh, MeshError> {
    if cells.is_empty() {
        return Err(MeshError::Empty);
    }
    let nv = vertices.len();
    let mut cells = cells;
    let mut referenced = vec![false; nv];
    for (c, ring) in cells.iter_mut().enumerate() {
        if ring.len() < 3 {
            return Err(MeshError::TooFewVertices { cell: c });
        }
        for &i in ring.iter() {
            if i >= nv {
                return Err(MeshError::IndexOutOfRange {
                    cell: c,
                    index: i,
                    n_vertices: nv,
                });
            }
        }
        let mut sorted = ring.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(MeshError::RepeatedVertex { cell: c, vertex: w[0] });
        }
        let area = signed_area(ring.iter().map(|&v| vertices[v]));
        let scale = ring_diameter(ring.iter().map(|&v| vertices[v]));
        if !(area.abs() > 1e-14 * scale * scale) {
            return Err(MeshError::ZeroArea { cell: c });
        }
        if area < 0.0 {
            ring.reverse();
        }
        for &v in ring.iter() {
            referenced[v] = true;
        }
    }
    if let Some(v) = referenced.iter().position(|r| !r) {
        return Err(MeshError::UnreferencedVertex(v));
    }
    check_coincident(&vertices)?;

    let mut edges: Vec<MeshEdge> = Vec::new();
    // Maps (lo, hi) to (edge id, direction of first traversal lo->hi).
    let mut lookup: HashMap<(usize, usize), (usize, bool)> = HashMap::new();
    let mut cell_edges = Vec::with_capacity(cells.len());
    for (c, ring) in cells.iter().enumerate() {
        let m = ring.len();
        let mut local = Vec::with_capacity(m);
        for i in 0..m {
            let a = ring[i];
            let b = ring[(i + 1) % m];
            let key = (a.min(b), a.max(b));
            let forward = a < b;
            match lookup.get(&key) {
                None => {
                    lookup.insert(key, (edges.len(), forward));
                    local.push(edges.len());
                    edges.push(MeshEdge {
                        vertices: [key.0, key.1],
                        cells: [Some(c), None],
                    });
                }
                Some(&(e, first_forward)) => {
                    if edges[e].cells[1].is_some() {
                        return Err(MeshError::OverSharedEdge(key.0, key.1));
                    }
                    if first_forward == forward {
                        return Err(MeshError::InconsistentOrientation(key.0, key.1));
                    }
                    edges[e].cells[1] = Some(c);
                    local.push(e);
                }
            }
        }
        cell_edges.push(local);
    }

    let mut boundary_vertex = vec![false; nv];
    for e in edges.iter().filter(|e| e.is_boundary()) {
        boundary_vertex[e.vertices[0]] = true;
        boundary_vertex[e.vertices[1]] = true;
    }

    Ok(PolyMesh {
        vertices,
        cells,
        edges,
        cell_edges,
        boundary_vertex,
    })
}

fn ring_diameter(points: impl Iterator<Item = Point>) -> f64 {
    let pts: Vec<Point> = points.collect();
    let mut d: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            d = d.max(dist(*p, *q));
        }
    }
    d
}

fn check_coincident(vertices: &[Point]) -> Result<(), MeshError> {
    if vertices.len() < 2 {
        return Ok(());
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in vertices {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let tol = 1e-12 * dist(lo, hi);
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by(|&a, &b| vertices[a][0].total_cmp(&vertices[b][0]));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if vertices[j][0] - vertices[i][0] > tol {
                break;
            }
            if dist(vertices[i], vertices[j]) <= tol {
                return Err(MeshError::CoincidentVertices(i.min(j), i.max(j)));
            }
        }
    }
    Ok(())
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
