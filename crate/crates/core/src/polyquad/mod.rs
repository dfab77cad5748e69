//! Scaled monomial bases, quadrature on polygons and edges, and the
//! polynomial Gram matrices underlying every projector.

mod basis;
mod quadrature;

pub use basis::{dim_poly, dim_poly_signed, exponents, index_of, MonomialBasis};
pub use quadrature::{map_to_triangle, LineRule, QuadRule};

use nalgebra::DMatrix;

use crate::mesh::{EdgeGeometry, ElementGeometry, Point};

/// Physical quadrature nodes and weights covering the element, exact for
/// polynomials of degree `exactness` on every fan triangle.
pub fn element_nodes(geom: &ElementGeometry, exactness: usize) -> Vec<(Point, f64)> {
    let rule = QuadRule::triangle(exactness);
    let mut out = Vec::with_capacity(rule.len() * geom.fan.len());
    for tri in &geom.fan {
        map_to_triangle(&rule, tri, &mut out);
    }
    out
}

pub fn integrate_element(
    geom: &ElementGeometry,
    exactness: usize,
    f: impl Fn(Point) -> f64,
) -> f64 {
    element_nodes(geom, exactness)
        .into_iter()
        .map(|(x, w)| w * f(x))
        .sum()
}

/// Line integral over `edge` with respect to arc length.
pub fn integrate_edge(edge: &EdgeGeometry, exactness: usize, f: impl Fn(Point) -> f64) -> f64 {
    let rule = LineRule::with_exactness(exactness);
    let (a, b) = (edge.start, edge.end);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(t, w)| w * f([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]))
        .sum::<f64>()
        * edge.length
}

/// Gram matrix `H_ij = (m_i, m_j)_E`, integrated exactly.
pub fn mass_matrix(basis: &MonomialBasis, geom: &ElementGeometry) -> DMatrix<f64> {
    let n = basis.dim();
    let mut h = DMatrix::zeros(n, n);
    let mut vals = vec![0.0; n];
    for (x, w) in element_nodes(geom, 2 * basis.degree) {
        basis.eval_into(x, &mut vals);
        for i in 0..n {
            let wi = w * vals[i];
            for j in i..n {
                h[(i, j)] += wi * vals[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = h[(j, i)];
        }
    }
    h
}
