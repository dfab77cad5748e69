//! PDE instances: coefficient, source, boundary datum and, where known,
//! the exact solution used to measure errors.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::mesh::{element_geometry, generate, MeshKind, Point, PolyMesh};
use crate::polyquad::integrate_element;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

/// Quadrature exactness used for the normalising norms.
const NORM_EXACTNESS: usize = 12;
/// Subdivisions of the reference mesh behind [`exact_norms`].
const REFERENCE_SUBDIVISIONS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("problem '{0}' has no exact solution")]
    MissingExact(String),
    #[error("unknown problem '{0}' (expected 'paper' or 'patch:<degree>')")]
    Unknown(String),
    #[error("patch degree must be between 0 and 4, got '{0}'")]
    PatchDegree(String),
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub kappa: ScalarFn,
    pub kappa_u: ScalarFn,
    pub f: FieldFn,
    pub exact_u: Option<FieldFn>,
    pub exact_grad: Option<GradFn>,
    pub boundary_g: FieldFn,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("has_exact", &self.exact_u.is_some())
            .finish()
    }
}

/// `kappa(u) = 1 / (1 + u)^2` with `u = (x - x^2)(y - y^2)` on the unit
/// square and homogeneous Dirichlet data.
pub fn paper_problem() -> ProblemSpec {
    let kappa = |t: f64| 1.0 / ((1.0 + t) * (1.0 + t));
    let kappa_u = |t: f64| -2.0 / (1.0 + t).powi(3);
    let u = |p: Point| (p[0] - p[0] * p[0]) * (p[1] - p[1] * p[1]);
    let grad = |p: Point| {
        let (x, y) = (p[0], p[1]);
        [(1.0 - 2.0 * x) * (y - y * y), (x - x * x) * (1.0 - 2.0 * y)]
    };
    let f = move |p: Point| {
        let (x, y) = (p[0], p[1]);
        let g = grad(p);
        let lap = -2.0 * (y - y * y) - 2.0 * (x - x * x);
        let t = u(p);
        -kappa_u(t) * (g[0] * g[0] + g[1] * g[1]) - kappa(t) * lap
    };
    ProblemSpec {
        name: "paper".into(),
        kappa: Arc::new(kappa),
        kappa_u: Arc::new(kappa_u),
        f: Arc::new(f),
        exact_u: Some(Arc::new(u)),
        exact_grad: Some(Arc::new(grad)),
        boundary_g: Arc::new(|_| 0.0),
    }
}

/// Bivariate polynomial as a list of `(x power, y power, coefficient)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    pub terms: Vec<(usize, usize, f64)>,
}

impl Poly2 {
    pub fn new(terms: Vec<(usize, usize, f64)>) -> Self {
        Poly2 { terms }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().filter(|t| t.2 != 0.0).map(|t| t.0 + t.1).max().unwrap_or(0)
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.terms.iter().map(|&(a, b, c)| c * p[0].powi(a as i32) * p[1].powi(b as i32)).sum()
    }

    pub fn grad(&self, p: Point) -> [f64; 2] {
        self.terms.iter().fold([0.0, 0.0], |g, &(a, b, c)| {
            let dx = if a > 0 { c * a as f64 * p[0].powi(a as i32 - 1) * p[1].powi(b as i32) } else { 0.0 };
            let dy = if b > 0 { c * b as f64 * p[0].powi(a as i32) * p[1].powi(b as i32 - 1) } else { 0.0 };
            [g[0] + dx, g[1] + dy]
        })
    }

    pub fn laplacian(&self) -> Poly2 {
        let mut terms = Vec::new();
        for &(a, b, c) in &self.terms {
            if a >= 2 {
                terms.push((a - 2, b, c * (a * (a - 1)) as f64));
            }
            if b >= 2 {
                terms.push((a, b - 2, c * (b * (b - 1)) as f64));
            }
        }
        Poly2 { terms }
    }

    /// Fixed polynomial of total degree `d` with every monomial present and
    /// a nonzero boundary trace.
    pub fn patch(d: usize) -> Poly2 {
        let mut terms = Vec::new();
        for s in 0..=d {
            for b in 0..=s {
                let a = s - b;
                terms.push((a, b, 1.0 / (1.0 + a as f64 + 2.0 * b as f64)));
            }
        }
        Poly2 { terms }
    }
}

/// `kappa = 1`, `f = -lap p`, Dirichlet data and exact solution `p`.
pub fn poisson_patch_problem(p: Poly2) -> ProblemSpec {
    let lap = p.laplacian();
    let (pu, pg, pb) = (p.clone(), p.clone(), p.clone());
    ProblemSpec {
        name: format!("patch:{}", p.degree()),
        kappa: Arc::new(|_| 1.0),
        kappa_u: Arc::new(|_| 0.0),
        f: Arc::new(move |x| -lap.eval(x)),
        exact_u: Some(Arc::new(move |x| pu.eval(x))),
        exact_grad: Some(Arc::new(move |x| pg.grad(x))),
        boundary_g: Arc::new(move |x| pb.eval(x)),
    }
}

/// Looks up a problem by its command-line name.
pub fn problem_by_name(name: &str) -> Result<ProblemSpec, ProblemError> {
    if name == "paper" {
        return Ok(paper_problem());
    }
    match name.strip_prefix("patch:") {
        Some(d) => match d.parse::<usize>() {
            Ok(d) if d <= 4 => Ok(poisson_patch_problem(Poly2::patch(d))),
            _ => Err(ProblemError::PatchDegree(d.to_string())),
        },
        None => Err(ProblemError::Unknown(name.to_string())),
    }
}

/// `(|u|, |grad u|)` in L2 over the unit square.
pub fn exact_norms(problem: &ProblemSpec) -> Result<(f64, f64), ProblemError> {
    let mesh = generate(MeshKind::Squares, REFERENCE_SUBDIVISIONS, 0).expect("valid subdivision");
    exact_norms_on(problem, &mesh)
}

/// `(|u|, |grad u|)` in L2 over the domain covered by `mesh`.
pub fn exact_norms_on(problem: &ProblemSpec, mesh: &PolyMesh) -> Result<(f64, f64), ProblemError> {
    let (Some(u), Some(grad)) = (&problem.exact_u, &problem.exact_grad) else {
        return Err(ProblemError::MissingExact(problem.name.clone()));
    };
    let (mut l2, mut h1) = (0.0, 0.0);
    for c in 0..mesh.n_cells() {
        let g = element_geometry(mesh, c);
        l2 += integrate_element(&g, NORM_EXACTNESS, |x| u(x).powi(2));
        h1 += integrate_element(&g, NORM_EXACTNESS, |x| {
            let d = grad(x);
            d[0] * d[0] + d[1] * d[1]
        });
    }
    Ok((l2.sqrt(), h1.sqrt()))
}
