//! Element projectors computed from degrees of freedom alone.
//!
//! All operators are stored as dense matrices acting on the local DoF
//! vector and returning coefficients in the scaled monomial basis of the
//! element:
//!
//! * `pinabla`: the energy projection onto `P_k`, built from
//!   `(grad v, grad p) = -(v, lap p) + <v, dp/dn>`. The volume term only
//!   needs cell moments and the boundary term only needs the edge traces,
//!   which are polynomials fixed by the vertex values and edge moments.
//!   Constants are fixed by the boundary mean (k = 1) or the cell mean.
//! * `pizero`: the L2 projection onto `P_k`. Moments up to degree `k - 2`
//!   are DoFs; moments of degree `k - 1` and `k` are those of `pinabla v`
//!   by construction of the local space.
//! * `pizero_grad`: the L2 projection of each gradient component onto
//!   `P_{k-1}`, from `(d_x v, q) = -(v, d_x q) + <v, q n_x>`.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::mesh::{ElementGeometry, Point};
use crate::polyquad::{dim_poly, element_nodes, exponents, index_of, mass_matrix, LineRule, MonomialBasis};

use super::compensated::{self, DdMatrix};
use super::{LocalLayout, VemError};

/// Gram systems with a 1-norm condition number above this are treated as
/// singular.
const MAX_GRAM_CONDITION: f64 = 1e14;

const REFINEMENT_STEPS: usize = 2;

#[derive(Debug, Clone)]
pub struct ElementProjectors {
    pub degree: usize,
    pub basis: MonomialBasis,
    pub layout: LocalLayout,
    /// `N_k x n_dof`.
    pub pinabla: DMatrix<f64>,
    /// `N_k x n_dof`.
    pub pizero: DMatrix<f64>,
    /// L2 projection onto `P_{k-1}`, `N_{k-1} x n_dof`.
    pub pizero_lower: DMatrix<f64>,
    /// Components of the projected gradient, each `N_{k-1} x n_dof`.
    pub pizero_grad: [DMatrix<f64>; 2],
    /// DoF functionals applied to each monomial, `n_dof x N_k`.
    pub dof_of_poly: DMatrix<f64>,
    /// Monomial Gram matrix `(m_i, m_j)_E`.
    pub mass: DMatrix<f64>,
    /// 1-norm condition number of the Gram matrix.
    pub gram_condition: f64,
}

/// One Gauss node on the element boundary together with the trace of each
/// local basis function there.
#[derive(Debug, Clone)]
pub(crate) struct BoundaryNode {
    pub x: Point,
    /// Gauss weight times edge length.
    pub weight: f64,
    pub normal: [f64; 2],
    pub trace: Vec<(usize, f64)>,
}

/// Inverse of the matrix mapping trace coefficients `c_m` (in powers of the
/// canonical edge parameter `xi` in [-1/2, 1/2]) to the edge DoFs
/// `[v(-1/2), v(1/2), int v xi^j dxi (j <= k - 2)]`.
fn trace_matrix(k: usize) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(k + 1, k + 1);
    for m in 0..=k {
        r[(0, m)] = (-0.5f64).powi(m as i32);
        r[(1, m)] = 0.5f64.powi(m as i32);
        for j in 0..k.saturating_sub(1) {
            let p = m + j;
            r[(2 + j, m)] = if p % 2 == 1 {
                0.0
            } else {
                2.0 * 0.5f64.powi(p as i32 + 1) / (p as f64 + 1.0)
            };
        }
    }
    r.try_inverse().expect("edge trace system is unisolvent")
}

pub(crate) fn boundary_nodes(geom: &ElementGeometry, k: usize, n_points: usize) -> Vec<BoundaryNode> {
    let layout = LocalLayout::new(geom.n_vertices(), k);
    let rinv = trace_matrix(k);
    let rule = LineRule::gauss_legendre(n_points);
    let nv = geom.n_vertices();
    let mut out = Vec::with_capacity(nv * n_points);
    for (i, e) in geom.edges.iter().enumerate() {
        let (first, second) = if e.reversed {
            (layout.vertex((i + 1) % nv), layout.vertex(i))
        } else {
            (layout.vertex(i), layout.vertex((i + 1) % nv))
        };
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let x = [
                e.start[0] + t * (e.end[0] - e.start[0]),
                e.start[1] + t * (e.end[1] - e.start[1]),
            ];
            let xi = if e.reversed { 0.5 - t } else { t - 0.5 };
            let mut trace = Vec::with_capacity(k + 1);
            for r in 0..=k {
                let phi: f64 = (0..=k).map(|m| xi.powi(m as i32) * rinv[(m, r)]).sum();
                let dof = match r {
                    0 => first,
                    1 => second,
                    _ => layout.edge(i, r - 2),
                };
                trace.push((dof, phi));
            }
            out.push(BoundaryNode {
                x,
                weight: w * e.length,
                normal: e.normal,
                trace,
            });
        }
    }
    out
}

pub fn compute_projectors(geom: &ElementGeometry, k: usize) -> Result<ElementProjectors, VemError> {
    if k < 1 {
        return Err(VemError::InvalidDegree(k));
    }
    let basis = MonomialBasis::on_element(k, geom);
    let layout = LocalLayout::new(geom.n_vertices(), k);
    let n = layout.len();
    let nk = dim_poly(k);
    let nk1 = dim_poly(k - 1);
    let area = geom.area;
    let bnodes = boundary_nodes(geom, k, k + 1);

    let mass = mass_matrix(&basis, geom);
    let gram_condition = condition_1(&mass).ok_or(VemError::SingularGram { cell: None })?;
    if gram_condition > MAX_GRAM_CONDITION {
        return Err(VemError::SingularGram { cell: None });
    }
    let dof_of_poly = dof_of_poly(geom, &basis, &layout, &mass);
    let lower = DdMatrix {
        hi: mass.view((0, 0), (nk1, nk1)).into_owned(),
        lo: DMatrix::zeros(nk1, nk1),
    };
    let derivative = derivative_matrices(&basis);

    // Projected gradient: H_{k-1} g = R with (d_x v, q) = -(v, d_x q) + <v, q n_x>.
    let lower_basis = MonomialBasis::new(k - 1, basis.center, basis.scale);
    let mut rhs = [DMatrix::zeros(nk1, n), DMatrix::zeros(nk1, n)];
    for (alpha, (a, bb)) in exponents(k - 1).into_iter().enumerate() {
        if a > 0 {
            rhs[0][(alpha, layout.cell(index_of(a - 1, bb)))] -= area * a as f64 / basis.scale;
        }
        if bb > 0 {
            rhs[1][(alpha, layout.cell(index_of(a, bb - 1)))] -= area * bb as f64 / basis.scale;
        }
    }
    for node in &bnodes {
        let vals = lower_basis.eval(node.x);
        for alpha in 0..nk1 {
            for &(d, phi) in &node.trace {
                let s = node.weight * vals[alpha] * phi;
                rhs[0][(alpha, d)] += s * node.normal[0];
                rhs[1][(alpha, d)] += s * node.normal[1];
            }
        }
    }
    // R D matches H_{k-1} times the derivative matrix only up to the
    // round-off of the boundary and volume terms, which the solve amplifies
    // by the Gram condition number. The defect on P_k is removed through a
    // left inverse of D; the correction vanishes in exact arithmetic.
    let left_inverse = solve(&compensated::product(&dof_of_poly.transpose(), &dof_of_poly), &dof_of_poly.transpose())?;
    let mut pizero_grad = Vec::with_capacity(2);
    for (r, t) in rhs.iter().zip(&derivative) {
        let g = solve(&lower, r)?;
        let defect = compensated::product(&g, &dof_of_poly).hi - t;
        pizero_grad.push(g - defect * &left_inverse);
    }
    let pizero_grad: [DMatrix<f64>; 2] = [pizero_grad[0].clone(), pizero_grad[1].clone()];

    // Energy projection: G c = B v. As grad m_b lies in P_{k-1},
    // (grad v, grad m_b) = (P0 grad v, grad m_b), so the rows b >= 1 of B
    // follow from the projected gradient. Row 0 fixes constants by the
    // boundary mean (k = 1) or the cell mean. G is formed as B D so that
    // pinabla * dof_of_poly is the identity up to the solve's round-off.
    let mut b = DMatrix::zeros(nk, n);
    for (g, t) in pizero_grad.iter().zip(&derivative) {
        b += t.transpose() * (&lower.hi * g);
    }
    b.row_mut(0).fill(0.0);
    if k == 1 {
        let perimeter = geom.perimeter();
        for node in &bnodes {
            for &(d, phi) in &node.trace {
                b[(0, d)] += node.weight * phi / perimeter;
            }
        }
    } else {
        b[(0, layout.cell(0))] = 1.0;
    }
    let pinabla = solve(&compensated::product(&b, &dof_of_poly), &b)?;

    // L2 projection onto P_k: H c = C v.
    let hpi = &mass * &pinabla;
    let n_low = dim_poly(k.saturating_sub(2));
    let mut c = DMatrix::zeros(nk, n);
    for alpha in 0..nk {
        if k >= 2 && alpha < n_low {
            c[(alpha, layout.cell(alpha))] = area;
        } else {
            c.row_mut(alpha).copy_from(&hpi.row(alpha));
        }
    }
    // C D is the Gram matrix up to round-off; solving with it keeps
    // pizero * dof_of_poly at the identity.
    let pizero = solve(&compensated::product(&c, &dof_of_poly), &c)?;
    let pizero_lower = solve(&lower, &c.rows(0, nk1).into_owned())?;

    log::trace!("gram condition {gram_condition:.3e}");

    Ok(ElementProjectors {
        degree: k,
        basis,
        layout,
        pinabla,
        pizero,
        pizero_lower,
        pizero_grad,
        dof_of_poly,
        mass,
        gram_condition,
    })
}

/// Matrices `N_{k-1} x N_k` mapping monomial coefficients to those of the
/// partial derivatives.
fn derivative_matrices(basis: &MonomialBasis) -> [DMatrix<f64>; 2] {
    let nk = basis.dim();
    let nk1 = dim_poly(basis.degree - 1);
    let mut out = [DMatrix::zeros(nk1, nk), DMatrix::zeros(nk1, nk)];
    for (beta, (a, b)) in exponents(basis.degree).into_iter().enumerate() {
        if a > 0 {
            out[0][(index_of(a - 1, b), beta)] = a as f64 / basis.scale;
        }
        if b > 0 {
            out[1][(index_of(a, b - 1), beta)] = b as f64 / basis.scale;
        }
    }
    out
}

fn dof_of_poly(
    geom: &ElementGeometry,
    basis: &MonomialBasis,
    layout: &LocalLayout,
    mass: &DMatrix<f64>,
) -> DMatrix<f64> {
    let k = basis.degree;
    let nk = basis.dim();
    let mut d = DMatrix::zeros(layout.len(), nk);
    for (i, v) in geom.vertices.iter().enumerate() {
        let vals = basis.eval(*v);
        for j in 0..nk {
            d[(layout.vertex(i), j)] = vals[j];
        }
    }
    if k >= 2 {
        let rule = LineRule::gauss_legendre(k + 1);
        for (i, e) in geom.edges.iter().enumerate() {
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let xi = t - 0.5;
                let vals = basis.eval(e.point_at(xi));
                for j in 0..layout.edge_moments() {
                    let s = w * xi.powi(j as i32);
                    for g in 0..nk {
                        d[(layout.edge(i, j), g)] += s * vals[g];
                    }
                }
            }
        }
        for a in 0..layout.cell_moments() {
            for g in 0..nk {
                d[(layout.cell(a), g)] = mass[(a, g)] / geom.area;
            }
        }
    }
    d
}

fn solve(a: &DdMatrix, b: &DMatrix<f64>) -> Result<DMatrix<f64>, VemError> {
    compensated::solve(a, b, REFINEMENT_STEPS).ok_or(VemError::SingularGram { cell: None })
}

fn condition_1(m: &DMatrix<f64>) -> Option<f64> {
    let inv = m.clone().try_inverse()?;
    let norm1 = |a: &DMatrix<f64>| {
        a.column_iter()
            .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    Some(norm1(m) * norm1(&inv))
}

/// Local DoF vector of `f`: vertex values, then edge and cell moments
/// integrated with exactness `2k`.
pub fn interpolate(f: impl Fn(Point) -> f64, geom: &ElementGeometry, k: usize) -> Vec<f64> {
    let layout = LocalLayout::new(geom.n_vertices(), k);
    let mut out = vec![0.0; layout.len()];
    for (i, v) in geom.vertices.iter().enumerate() {
        out[layout.vertex(i)] = f(*v);
    }
    if k >= 2 {
        let rule = LineRule::with_exactness(2 * k);
        for (i, e) in geom.edges.iter().enumerate() {
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let xi = t - 0.5;
                let fx = f(e.point_at(xi));
                for j in 0..layout.edge_moments() {
                    out[layout.edge(i, j)] += w * fx * xi.powi(j as i32);
                }
            }
        }
        let basis = MonomialBasis::on_element(k - 2, geom);
        let mut vals = vec![0.0; basis.dim()];
        for (x, w) in element_nodes(geom, 2 * k) {
            basis.eval_into(x, &mut vals);
            let fx = f(x);
            for (a, m) in vals.iter().enumerate() {
                out[layout.cell(a)] += w * fx * m / geom.area;
            }
        }
    }
    out
}

impl ElementProjectors {
    pub fn n_dofs(&self) -> usize {
        self.layout.len()
    }

    /// DoF vector of the constant function 1.
    pub fn constant_dofs(&self) -> Vec<f64> {
        self.dof_of_poly.column(0).iter().copied().collect()
    }

    /// Long-format CSV (`name,row,col,value`) of every projector matrix.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,row,col,value\n");
        let mut dump = |name: &str, m: &DMatrix<f64>| {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let _ = writeln!(s, "{name},{i},{j},{:?}", m[(i, j)]);
                }
            }
        };
        dump("pinabla", &self.pinabla);
        dump("pizero", &self.pizero);
        dump("pizero_grad_x", &self.pizero_grad[0]);
        dump("pizero_grad_y", &self.pizero_grad[1]);
        dump("dof_of_poly", &self.dof_of_poly);
        s
    }
}
