use super::{dist, Point, PolyMesh};

/// Shoelace signed area of a closed ring (positive for counter-clockwise).
pub fn signed_area(points: impl Iterator<Item = Point>) -> f64 {
    let pts: Vec<Point> = points.collect();
    let n = pts.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// One edge of an element, listed in counter-clockwise traversal order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGeometry {
    pub start: Point,
    pub end: Point,
    pub length: f64,
    /// Outward unit normal.
    pub normal: [f64; 2],
    /// True when the canonical orientation of the edge (from the lower to
    /// the higher global vertex index) runs against the element traversal.
    pub reversed: bool,
}

impl EdgeGeometry {
    /// Endpoints in canonical orientation.
    pub fn canonical(&self) -> (Point, Point) {
        if self.reversed {
            (self.end, self.start)
        } else {
            (self.start, self.end)
        }
    }

    pub fn midpoint(&self) -> Point {
        [
            0.5 * (self.start[0] + self.end[0]),
            0.5 * (self.start[1] + self.end[1]),
        ]
    }

    /// Point at canonical parameter `xi` in [-1/2, 1/2].
    pub fn point_at(&self, xi: f64) -> Point {
        let (a, b) = self.canonical();
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        [mid[0] + xi * (b[0] - a[0]), mid[1] + xi * (b[1] - a[1])]
    }
}

/// Everything the projectors and quadrature need to know about one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub vertices: Vec<Point>,
    pub area: f64,
    /// Barycentre.
    pub centroid: Point,
    /// Maximum pairwise vertex distance.
    pub diameter: f64,
    pub edges: Vec<EdgeGeometry>,
    /// Sub-triangles covering the cell, each counter-clockwise.
    pub fan: Vec<[Point; 3]>,
    pub convex: bool,
}

impl ElementGeometry {
    /// Geometry of a free-standing counter-clockwise polygon. Edge
    /// orientation follows vertex order, so only the closing edge is reversed.
    pub fn from_polygon(points: &[Point]) -> Self {
        let ids: Vec<usize> = (0..points.len()).collect();
        Self::with_ids(points, &ids)
    }

    pub(crate) fn with_ids(points: &[Point], ids: &[usize]) -> Self {
        let n = points.len();
        let area = signed_area(points.iter().copied());
        let mut cx = 0.0;
        let mut cy = 0.0;
        for i in 0..n {
            let p = points[i];
            let q = points[(i + 1) % n];
            let w = p[0] * q[1] - q[0] * p[1];
            cx += (p[0] + q[0]) * w;
            cy += (p[1] + q[1]) * w;
        }
        let centroid = [cx / (6.0 * area), cy / (6.0 * area)];

        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max(dist(points[i], points[j]));
            }
        }

        let edges = (0..n)
            .map(|i| {
                let start = points[i];
                let end = points[(i + 1) % n];
                let length = dist(start, end);
                let normal = [(end[1] - start[1]) / length, -(end[0] - start[0]) / length];
                EdgeGeometry {
                    start,
                    end,
                    length,
                    normal,
                    reversed: ids[i] > ids[(i + 1) % n],
                }
            })
            .collect();

        let convex = (0..n).all(|i| {
            let a = points[(i + n - 1) % n];
            let b = points[i];
            let c = points[(i + 1) % n];
            triangle_area(a, b, c) >= -1e-14 * diameter * diameter
        });

        let tiny = 1e-14 * diameter * diameter;
        let star_from_centroid =
            (0..n).all(|i| triangle_area(centroid, points[i], points[(i + 1) % n]) > tiny);
        let fan = if star_from_centroid {
            (0..n)
                .map(|i| [centroid, points[i], points[(i + 1) % n]])
                .collect()
        } else {
            ear_clip(points)
        };

        ElementGeometry {
            vertices: points.to_vec(),
            area,
            centroid,
            diameter,
            edges,
            fan,
            convex,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }
}

/// Geometry of cell `cell` of `mesh`.
pub fn element_geometry(mesh: &PolyMesh, cell: usize) -> ElementGeometry {
    let ring = &mesh.cells()[cell];
    let pts: Vec<Point> = ring.iter().map(|&v| mesh.vertices()[v]).collect();
    ElementGeometry::with_ids(&pts, ring)
}

/// Ear-clipping triangulation of a simple counter-clockwise polygon.
fn ear_clip(points: &[Point]) -> Vec<[Point; 3]> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    let mut tris = Vec::with_capacity(points.len().saturating_sub(2));
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let ia = idx[(i + m - 1) % m];
            let ib = idx[i];
            let ic = idx[(i + 1) % m];
            let (a, b, c) = (points[ia], points[ib], points[ic]);
            if triangle_area(a, b, c) <= 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                j != ia && j != ib && j != ic && {
                    let p = points[j];
                    triangle_area(a, b, p) >= 0.0
                        && triangle_area(b, c, p) >= 0.0
                        && triangle_area(c, a, p) >= 0.0
                }
            });
            if !blocked {
                tris.push([a, b, c]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            // Only reachable for numerically degenerate input; fall back to a
            // vertex fan so the total area is still exact.
            let a = points[idx[0]];
            for w in idx[1..].windows(2) {
                tris.push([a, points[w[0]], points[w[1]]]);
            }
            return tris;
        }
    }
    tris.push([points[idx[0]], points[idx[1]], points[idx[2]]]);
    tris
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l_hexagon() -> Vec<Point> {
        vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]]
    }

    fn fan_area(g: &ElementGeometry) -> f64 {
        g.fan.iter().map(|t| triangle_area(t[0], t[1], t[2])).sum()
    }

    #[test]
    fn unit_square_geometry() {
        let g = ElementGeometry::from_polygon(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(g.area, 1.0);
        assert_eq!(g.centroid, [0.5, 0.5]);
        assert!((g.diameter - 2f64.sqrt()).abs() < 1e-15);
        assert!(g.convex);
        assert_eq!(g.fan.len(), 4);
        assert_eq!(g.edges[0].normal, [0.0, -1.0]);
    }

    #[test]
    fn triangle_geometry() {
        let g = ElementGeometry::from_polygon(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(g.area, 0.5);
        assert!((g.centroid[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((g.centroid[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((g.diameter - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn l_hexagon_geometry() {
        let g = ElementGeometry::from_polygon(&l_hexagon());
        // Composite of [0,2]x[0,1] (area 2, centroid (1, 1/2)) and
        // [0,1]x[1,2] (area 1, centroid (1/2, 3/2)).
        let area = 2.0 + 1.0;
        let cx = (2.0 * 1.0 + 1.0 * 0.5) / area;
        let cy = (2.0 * 0.5 + 1.0 * 1.5) / area;
        assert!((g.area - area).abs() < 1e-14);
        assert!((g.centroid[0] - cx).abs() < 1e-14);
        assert!((g.centroid[1] - cy).abs() < 1e-14);
        assert!((cx - 5.0 / 6.0).abs() < 1e-15);
        assert!(!g.convex);
        assert!((fan_area(&g) - 3.0).abs() < 1e-14);
        assert!(g
            .fan
            .iter()
            .all(|t| triangle_area(t[0], t[1], t[2]) > 0.0));
    }

    #[test]
    fn ear_clipping_for_hidden_centroid() {
        // A thin "C" shape whose centroid lies outside the polygon.
        let pts = vec![
            [0.0, 0.0],
            [3.0, 0.0],
            [3.0, 0.5],
            [0.5, 0.5],
            [0.5, 2.5],
            [3.0, 2.5],
            [3.0, 3.0],
            [0.0, 3.0],
        ];
        let g = ElementGeometry::from_polygon(&pts);
        assert_eq!(g.fan.len(), pts.len() - 2);
        assert!((fan_area(&g) - g.area).abs() < 1e-13 * g.area);
    }

    #[test]
    fn normals_point_outward() {
        let pts = vec![[0.0, 0.0], [2.0, 0.1], [2.5, 1.0], [1.0, 2.0], [-0.3, 1.1]];
        let g = ElementGeometry::from_polygon(&pts);
        for e in &g.edges {
            let m = e.midpoint();
            let d = [m[0] - g.centroid[0], m[1] - g.centroid[1]];
            assert!(e.normal[0] * d[0] + e.normal[1] * d[1] > 0.0);
            assert!((e.normal[0].hypot(e.normal[1]) - 1.0).abs() < 1e-15);
        }
        assert!(!g.edges[0].reversed && g.edges[4].reversed);
        let (a, b) = g.edges[4].canonical();
        assert_eq!((a, b), ([0.0, 0.0], [-0.3, 1.1]));
        assert_eq!(g.edges[4].point_at(-0.5), [0.0, 0.0]);
    }
}
