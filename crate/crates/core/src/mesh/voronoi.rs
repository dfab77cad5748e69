//! Lloyd-relaxed Voronoi tessellations of the unit square.
//!
//! Each cell is obtained by clipping the square with the bisector
//! half-planes of nearby sites, found through a uniform bucket grid. The
//! search stops once every unvisited site is farther than twice the current
//! cell radius, at which point no further bisector can cut the cell.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{build_mesh, signed_area, MeshError, Point, PolyMesh};

/// Vertices of different cells closer than this are the same vertex.
const MERGE_TOL: f64 = 1e-10;

pub(crate) fn lloyd_voronoi_mesh(
    n: usize,
    seed: u64,
    iterations: usize,
) -> Result<PolyMesh, MeshError> {
    let count = n * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sites: Vec<Point> = (0..count).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    for _ in 0..iterations {
        let cells = voronoi_cells(&sites);
        sites = cells.par_iter().map(|c| polygon_centroid(c)).collect();
    }
    let cells = voronoi_cells(&sites);
    assemble(cells)
}

fn polygon_centroid(poly: &[Point]) -> Point {
    let a = signed_area(poly.iter().copied());
    let n = poly.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let w = p[0] * q[1] - q[0] * p[1];
        cx += (p[0] + q[0]) * w;
        cy += (p[1] + q[1]) * w;
    }
    [cx / (6.0 * a), cy / (6.0 * a)]
}

struct SiteGrid {
    per_side: usize,
    size: f64,
    buckets: Vec<Vec<usize>>,
}

impl SiteGrid {
    fn new(sites: &[Point]) -> Self {
        let per_side = ((sites.len() as f64).sqrt().ceil() as usize).max(1);
        let size = 1.0 / per_side as f64;
        let mut buckets = vec![Vec::new(); per_side * per_side];
        for (i, p) in sites.iter().enumerate() {
            let (bi, bj) = Self::locate(per_side, size, *p);
            buckets[bj * per_side + bi].push(i);
        }
        SiteGrid {
            per_side,
            size,
            buckets,
        }
    }

    fn locate(per_side: usize, size: f64, p: Point) -> (usize, usize) {
        let f = |x: f64| ((x / size).floor().max(0.0) as usize).min(per_side - 1);
        (f(p[0]), f(p[1]))
    }
}

fn voronoi_cells(sites: &[Point]) -> Vec<Vec<Point>> {
    let grid = SiteGrid::new(sites);
    (0..sites.len())
        .into_par_iter()
        .map(|i| voronoi_cell(i, sites, &grid))
        .collect()
}

fn voronoi_cell(i: usize, sites: &[Point], grid: &SiteGrid) -> Vec<Point> {
    let p = sites[i];
    let mut poly = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let (bi, bj) = SiteGrid::locate(grid.per_side, grid.size, p);
    let ps = grid.per_side as isize;
    let mut ring = 0isize;
    loop {
        for dj in -ring..=ring {
            for di in -ring..=ring {
                if di.abs() != ring && dj.abs() != ring {
                    continue;
                }
                let (x, y) = (bi as isize + di, bj as isize + dj);
                if x < 0 || y < 0 || x >= ps || y >= ps {
                    continue;
                }
                for &j in &grid.buckets[(y * ps + x) as usize] {
                    if j != i {
                        poly = clip(&poly, p, sites[j]);
                    }
                }
            }
        }
        let radius = poly
            .iter()
            .map(|v| (v[0] - p[0]).hypot(v[1] - p[1]))
            .fold(0.0, f64::max);
        let covered = ring >= ps;
        if covered || ring as f64 * grid.size >= 2.0 * radius {
            break;
        }
        ring += 1;
    }
    poly
}

/// Keeps the part of `poly` closer to `p` than to `q`.
fn clip(poly: &[Point], p: Point, q: Point) -> Vec<Point> {
    let d = [q[0] - p[0], q[1] - p[1]];
    let m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
    let side = |x: Point| (x[0] - m[0]) * d[0] + (x[1] - m[1]) * d[1];
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let (sa, sb) = (side(a), side(b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let t = sa / (sa - sb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Merges per-cell polygons into a conforming mesh with shared vertices.
fn assemble(cells: Vec<Vec<Point>>) -> Result<PolyMesh, MeshError> {
    let key = |p: Point| ((p[0] / MERGE_TOL).floor() as i64, (p[1] / MERGE_TOL).floor() as i64);
    let mut vertices: Vec<Point> = Vec::new();
    let mut index: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut rings = Vec::with_capacity(cells.len());
    for poly in cells {
        let mut ring: Vec<usize> = Vec::with_capacity(poly.len());
        for mut p in poly {
            for x in p.iter_mut() {
                if x.abs() < 1e-12 {
                    *x = 0.0;
                } else if (*x - 1.0).abs() < 1e-12 {
                    *x = 1.0;
                }
            }
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = index.get(&(kx + dx, ky + dy)) {
                        for &v in list {
                            let q = vertices[v];
                            if (q[0] - p[0]).hypot(q[1] - p[1]) <= MERGE_TOL {
                                found = Some(v);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let v = found.unwrap_or_else(|| {
                vertices.push(p);
                index.entry((kx, ky)).or_default().push(vertices.len() - 1);
                vertices.len() - 1
            });
            if ring.last() != Some(&v) {
                ring.push(v);
            }
        }
        while ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        rings.push(ring);
    }
    build_mesh(vertices, rings)
}
