//! Shape-regularity diagnostics: edge-to-diameter ratios and the radius of
//! the largest inscribed ball relative to the element diameter.

use super::{element_geometry, ElementGeometry, PolyMesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    /// min over cells of min_e h_e / h_E.
    pub min_edge_ratio: f64,
    /// min over convex cells of inradius / h_E.
    pub min_star_ratio: f64,
    pub nonconvex_cells: usize,
}

pub fn regularity_report(mesh: &PolyMesh) -> RegularityReport {
    let mut min_edge_ratio = f64::INFINITY;
    let mut min_star_ratio = f64::INFINITY;
    let mut nonconvex_cells = 0;
    for c in 0..mesh.n_cells() {
        let g = element_geometry(mesh, c);
        let shortest = g.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min);
        min_edge_ratio = min_edge_ratio.min(shortest / g.diameter);
        if g.convex {
            min_star_ratio = min_star_ratio.min(inradius(&g) / g.diameter);
        } else {
            nonconvex_cells += 1;
        }
    }
    RegularityReport {
        min_edge_ratio,
        min_star_ratio,
        nonconvex_cells,
    }
}

/// Radius of the Chebyshev ball of a convex polygon.
///
/// The centre `x` and radius `r` maximise `r` subject to
/// `n_i . (x - a_i) + r <= 0` for every edge; the optimum sits where three
/// constraints are active, so all triples are enumerated and the best
/// feasible one is kept.
pub(crate) fn inradius(g: &ElementGeometry) -> f64 {
    let rows: Vec<[f64; 4]> = g
        .edges
        .iter()
        .map(|e| {
            let rhs = e.normal[0] * e.start[0] + e.normal[1] * e.start[1];
            [e.normal[0], e.normal[1], 1.0, rhs]
        })
        .collect();
    let m = rows.len();
    let tol = 1e-12 * g.diameter;
    let mut best: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let Some(sol) = solve3([rows[i], rows[j], rows[k]]) else {
                    continue;
                };
                if sol[2] <= best {
                    continue;
                }
                let feasible = rows
                    .iter()
                    .all(|r| r[0] * sol[0] + r[1] * sol[1] + r[2] * sol[2] <= r[3] + tol);
                if feasible {
                    best = sol[2];
                }
            }
        }
    }
    best
}

fn solve3(a: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let base = [
        [a[0][0], a[0][1], a[0][2]],
        [a[1][0], a[1][1], a[1][2]],
        [a[2][0], a[2][1], a[2][2]],
    ];
    let d = det(base);
    if d.abs() < 1e-14 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut m = base;
        for r in 0..3 {
            m[r][col] = a[r][3];
        }
        *o = det(m) / d;
    }
    Some(out)
}
