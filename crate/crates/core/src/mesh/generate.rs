//! Structured and random mesh families on the unit square.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_mesh, voronoi, MeshError, Point, PolyMesh};

/// Lloyd relaxation sweeps applied to the Voronoi family.
pub const LLOYD_ITERATIONS: usize = 100;

/// Maximum displacement of interior vertices of the random-quad family, as a
/// fraction of the grid spacing.
pub const QUAD_PERTURBATION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshKind {
    Squares,
    Triangles,
    RandomQuads,
    Voronoi,
}

impl MeshKind {
    pub const ALL: [MeshKind; 4] = [
        MeshKind::Squares,
        MeshKind::Triangles,
        MeshKind::RandomQuads,
        MeshKind::Voronoi,
    ];
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeshKind::Squares => "squares",
            MeshKind::Triangles => "triangles",
            MeshKind::RandomQuads => "quads",
            MeshKind::Voronoi => "voronoi",
        })
    }
}

impl FromStr for MeshKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "squares" => Ok(MeshKind::Squares),
            "triangles" => Ok(MeshKind::Triangles),
            "quads" | "random_quads" => Ok(MeshKind::RandomQuads),
            "voronoi" | "polygons" => Ok(MeshKind::Voronoi),
            other => Err(format!("unknown mesh kind '{other}'")),
        }
    }
}

/// Generates an `n`-by-`n` mesh of the unit square. Output depends only on
/// `(kind, n, seed)`.
pub fn generate(kind: MeshKind, n: usize, seed: u64) -> Result<PolyMesh, MeshError> {
    if n < 1 {
        return Err(MeshError::InvalidSubdivision(n));
    }
    match kind {
        MeshKind::Squares => {
            let (v, c) = grid(n, None);
            build_mesh(v, c)
        }
        MeshKind::Triangles => {
            let (v, quads) = grid(n, None);
            let cells = quads
                .into_iter()
                .flat_map(|q| [vec![q[0], q[1], q[2]], vec![q[0], q[2], q[3]]])
                .collect();
            build_mesh(v, cells)
        }
        MeshKind::RandomQuads => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (v, c) = grid(n, Some(&mut rng));
            build_mesh(v, c)
        }
        MeshKind::Voronoi => voronoi::lloyd_voronoi_mesh(n, seed, LLOYD_ITERATIONS),
    }
}

/// Tensor grid of `n`x`n` squares; vertices row-major. Interior vertices
/// are displaced uniformly within a disc when `rng` is given.
fn grid(n: usize, mut rng: Option<&mut ChaCha8Rng>) -> (Vec<Point>, Vec<Vec<usize>>) {
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let mut p = [i as f64 * h, j as f64 * h];
            if i == n {
                p[0] = 1.0;
            }
            if j == n {
                p[1] = 1.0;
            }
            if let Some(rng) = rng.as_deref_mut() {
                if i > 0 && i < n && j > 0 && j < n {
                    let r = QUAD_PERTURBATION * h * rng.gen::<f64>().sqrt();
                    let t = std::f64::consts::TAU * rng.gen::<f64>();
                    p[0] += r * t.cos();
                    p[1] += r * t.sin();
                }
            }
            vertices.push(p);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    (vertices, cells)
}
