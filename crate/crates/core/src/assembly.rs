//! Local forms and global assembly.
//!
//! For a frozen iterate `z` the local bilinear form is
//!
//! ```text
//! a_E(z; w, v) = int_E kappa(P0 z) (P0 grad w) . (P0 grad v)
//!              + kappa(mean z) (w - D P0 w) . (v - D P0 v)
//! ```
//!
//! where `P0` is the L2 projection onto `P_k` (gradients onto `P_{k-1}`),
//! `D` maps a polynomial to its DoF vector and `mean z` is the cell mean of
//! `P0 z`. The Newton form is the derivative of `z -> a_E(z; z, v)` minus
//! `a_E(z; ., v)`, and the load is `(f, P0_{k-1} v)`.
//!
//! `kappa` is evaluated pointwise at quadrature nodes of exactness `2k + 2`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::{element_geometry, ElementGeometry, Point, PolyMesh};
use crate::polyquad::{dim_poly, element_nodes};
use crate::problems::ProblemSpec;
use crate::solver::CsrMatrix;
use crate::vemspace::{build_dofmap, compute_projectors, interpolate_global, DofMap, ElementProjectors, VemError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("kappa is not finite at ({x}, {y}) where the projected iterate is {value}{}",
        match .cell { Some(c) => format!(" (cell {c})"), None => String::new() },
        x = .point[0], y = .point[1])]
    NonFiniteKappa {
        cell: Option<usize>,
        point: Point,
        value: f64,
    },
    #[error("dimension mismatch: expected a vector of length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Vem(#[from] VemError),
}

/// Whether the global system is the frozen-coefficient operator or the
/// Newton linearisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    FixedPoint,
    Newton,
}

/// Element data reused by every assembly: projectors, quadrature nodes
/// with the monomials evaluated there, and the stabilisation matrix.
#[derive(Debug, Clone)]
pub struct ElementCache {
    pub geom: ElementGeometry,
    pub proj: ElementProjectors,
    cell: Option<usize>,
    nodes: Vec<(Point, f64)>,
    /// `n_nodes x N_k` monomial values. The first `N_{k-1}` columns are
    /// the lower-degree monomials.
    values: DMatrix<f64>,
    /// `(I - D P0)^T (I - D P0)`.
    stab: DMatrix<f64>,
    /// Row vector giving the cell mean of `P0 v`.
    mean0: DVector<f64>,
}

impl ElementCache {
    pub fn new(geom: ElementGeometry, proj: ElementProjectors) -> Self {
        let k = proj.degree;
        let n = proj.n_dofs();
        let nodes = element_nodes(&geom, 2 * k + 2);
        let nk = dim_poly(k);
        let mut values = DMatrix::zeros(nodes.len(), nk);
        let mut buf = vec![0.0; nk];
        for (q, (x, _)) in nodes.iter().enumerate() {
            proj.basis.eval_into(*x, &mut buf);
            for j in 0..nk {
                values[(q, j)] = buf[j];
            }
        }
        let residual = DMatrix::identity(n, n) - &proj.dof_of_poly * &proj.pizero;
        let stab = residual.transpose() * &residual;
        let mean0 = (proj.mass.row(0) * &proj.pizero).transpose() / geom.area;
        ElementCache {
            geom,
            proj,
            cell: None,
            nodes,
            values,
            stab,
            mean0,
        }
    }

    fn with_cell(mut self, cell: usize) -> Self {
        self.cell = Some(cell);
        self
    }

    pub fn n_dofs(&self) -> usize {
        self.proj.n_dofs()
    }

    /// Quadrature nodes of exactness `2k + 2`.
    pub fn nodes(&self) -> &[(Point, f64)] {
        &self.nodes
    }

    /// Stabilisation matrix without its coefficient.
    pub fn stabilization(&self) -> &DMatrix<f64> {
        &self.stab
    }

    fn n_lower(&self) -> usize {
        dim_poly(self.proj.degree - 1)
    }

    fn check_len(&self, z: &[f64]) -> Result<(), AssemblyError> {
        if z.len() != self.n_dofs() {
            return Err(AssemblyError::DimensionMismatch {
                expected: self.n_dofs(),
                found: z.len(),
            });
        }
        Ok(())
    }

    fn eval_kappa(&self, kappa: &dyn Fn(f64) -> f64, point: Point, value: f64) -> Result<f64, AssemblyError> {
        let kv = kappa(value);
        if kv.is_finite() {
            Ok(kv)
        } else {
            Err(AssemblyError::NonFiniteKappa {
                cell: self.cell,
                point,
                value,
            })
        }
    }

    /// Cell mean of `P0 z`.
    pub fn mean(&self, z: &[f64]) -> f64 {
        self.mean0.iter().zip(z).map(|(m, v)| m * v).sum()
    }

    /// Values of the polynomial with monomial coefficients `c` at the nodes.
    pub fn values_at_nodes(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.values.columns(0, c.len()) * c
    }

    /// Consistency part only, `int kappa(P0 z) P0 grad w . P0 grad v`.
    pub fn consistency(&self, kappa: &dyn Fn(f64) -> f64, z: &[f64]) -> Result<DMatrix<f64>, AssemblyError> {
        self.check_len(z)?;
        let nl = self.n_lower();
        let c = &self.proj.pizero * DVector::from_column_slice(z);
        let uq = &self.values * &c;
        let mut m = DMatrix::<f64>::zeros(nl, nl);
        for (q, (x, w)) in self.nodes.iter().enumerate() {
            let wk = w * self.eval_kappa(kappa, *x, uq[q])?;
            for i in 0..nl {
                let s = wk * self.values[(q, i)];
                for j in i..nl {
                    m[(i, j)] += s * self.values[(q, j)];
                }
            }
        }
        for i in 0..nl {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
        let [gx, gy] = &self.proj.pizero_grad;
        Ok(gx.transpose() * &m * gx + gy.transpose() * &m * gy)
    }

    /// Full local matrix of `a_E(z; ., .)`.
    pub fn stiffness(&self, kappa: &dyn Fn(f64) -> f64, z: &[f64]) -> Result<DMatrix<f64>, AssemblyError> {
        let mut k = self.consistency(kappa, z)?;
        let zbar = self.mean(z);
        let k0 = self.eval_kappa(kappa, self.geom.centroid, zbar)?;
        k += &self.stab * k0;
        Ok(k)
    }

    /// Newton correction `b_E(z; delta, v)`, rows indexed by `v`.
    pub fn newton(&self, kappa_u: &dyn Fn(f64) -> f64, z: &[f64]) -> Result<DMatrix<f64>, AssemblyError> {
        self.check_len(z)?;
        let nl = self.n_lower();
        let nk = self.values.ncols();
        let zv = DVector::from_column_slice(z);
        let c = &self.proj.pizero * &zv;
        let uq = &self.values * &c;
        let [gx, gy] = &self.proj.pizero_grad;
        let (gzx, gzy) = (gx * &zv, gy * &zv);
        let lower = self.values.columns(0, nl);
        let (dxq, dyq) = (&lower * &gzx, &lower * &gzy);
        let mut nx = DMatrix::<f64>::zeros(nl, nk);
        let mut ny = DMatrix::<f64>::zeros(nl, nk);
        for (q, (x, w)) in self.nodes.iter().enumerate() {
            let wk = w * self.eval_kappa(kappa_u, *x, uq[q])?;
            let (sx, sy) = (wk * dxq[q], wk * dyq[q]);
            for i in 0..nl {
                let li = self.values[(q, i)];
                for j in 0..nk {
                    let mj = self.values[(q, j)];
                    nx[(i, j)] += sx * li * mj;
                    ny[(i, j)] += sy * li * mj;
                }
            }
        }
        let pz = &self.proj.pizero;
        let mut b = gx.transpose() * nx * pz + gy.transpose() * ny * pz;
        let k0 = self.eval_kappa(kappa_u, self.geom.centroid, self.mean(z))?;
        if k0 != 0.0 {
            let sz = &self.stab * &zv;
            b += (sz * k0) * self.mean0.transpose();
        }
        Ok(b)
    }

    /// `(f, P0_{k-1} v)` for each basis function `v`.
    pub fn load(&self, f: &dyn Fn(Point) -> f64) -> DVector<f64> {
        let nl = self.n_lower();
        let mut b = DVector::<f64>::zeros(nl);
        for (q, (x, w)) in self.nodes.iter().enumerate() {
            let wf = w * f(*x);
            for i in 0..nl {
                b[i] += wf * self.values[(q, i)];
            }
        }
        self.proj.pizero_lower.transpose() * b
    }
}

pub fn local_stiffness(
    proj: &ElementProjectors,
    geom: &ElementGeometry,
    kappa: &dyn Fn(f64) -> f64,
    z: &[f64],
) -> Result<DMatrix<f64>, AssemblyError> {
    ElementCache::new(geom.clone(), proj.clone()).stiffness(kappa, z)
}

pub fn local_newton(
    proj: &ElementProjectors,
    geom: &ElementGeometry,
    kappa_u: &dyn Fn(f64) -> f64,
    z: &[f64],
) -> Result<DMatrix<f64>, AssemblyError> {
    ElementCache::new(geom.clone(), proj.clone()).newton(kappa_u, z)
}

pub fn local_load(proj: &ElementProjectors, geom: &ElementGeometry, f: &dyn Fn(Point) -> f64) -> DVector<f64> {
    ElementCache::new(geom.clone(), proj.clone()).load(f)
}

/// Full (unreduced) global operators at one iterate.
#[derive(Debug, Clone)]
pub struct GlobalParts {
    pub stiffness: CsrMatrix,
    /// `stiffness + newton correction`, present in Newton mode.
    pub jacobian: Option<CsrMatrix>,
    pub load: Vec<f64>,
}

/// Mesh, DoF map, element caches and interpolated Dirichlet values for one
/// degree.
#[derive(Debug, Clone)]
pub struct Discretization {
    dofmap: DofMap,
    elements: Vec<ElementCache>,
    boundary_values: Vec<f64>,
    max_diameter: f64,
}

impl Discretization {
    pub fn new(mesh: &PolyMesh, k: usize, problem: &ProblemSpec) -> Result<Self, AssemblyError> {
        let dofmap = build_dofmap(mesh, k)?;
        let elements = (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| {
                let geom = element_geometry(mesh, c);
                let proj = compute_projectors(&geom, k).map_err(|e| match e {
                    VemError::SingularGram { .. } => VemError::SingularGram { cell: Some(c) },
                    other => other,
                })?;
                Ok(ElementCache::new(geom, proj).with_cell(c))
            })
            .collect::<Result<Vec<_>, VemError>>()?;
        let g = &problem.boundary_g;
        let mut boundary_values = interpolate_global(|x| g(x), mesh, &dofmap);
        for (d, v) in boundary_values.iter_mut().enumerate() {
            if !dofmap.is_boundary(d) {
                *v = 0.0;
            }
        }
        Ok(Discretization {
            dofmap,
            elements,
            boundary_values,
            max_diameter: mesh.max_diameter(),
        })
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.dofmap
    }

    pub fn degree(&self) -> usize {
        self.dofmap.degree()
    }

    pub fn elements(&self) -> &[ElementCache] {
        &self.elements
    }

    pub fn max_diameter(&self) -> f64 {
        self.max_diameter
    }

    /// Full DoF vector holding the interpolated Dirichlet datum on boundary
    /// DoFs and zero elsewhere.
    pub fn boundary_values(&self) -> &[f64] {
        &self.boundary_values
    }

    fn keep(&self) -> Vec<Option<usize>> {
        (0..self.dofmap.n_dofs()).map(|d| self.dofmap.interior_index(d)).collect()
    }

    /// Local DoF values of cell `c` gathered from a global vector.
    pub fn gather(&self, c: usize, z: &[f64]) -> Vec<f64> {
        self.dofmap.local_to_global(c).iter().map(|&g| z[g]).collect()
    }

    pub fn assemble_parts(&self, problem: &ProblemSpec, z: &[f64], mode: Mode) -> Result<GlobalParts, AssemblyError> {
        let n = self.dofmap.n_dofs();
        if z.len() != n {
            return Err(AssemblyError::DimensionMismatch { expected: n, found: z.len() });
        }
        let kappa = &*problem.kappa;
        let kappa_u = &*problem.kappa_u;
        let f = &*problem.f;
        type Local = (DMatrix<f64>, Option<DMatrix<f64>>, DVector<f64>);
        let locals = self
            .elements
            .par_iter()
            .enumerate()
            .map(|(c, el)| -> Result<Local, AssemblyError> {
                let zl = self.gather(c, z);
                let k = el.stiffness(kappa, &zl)?;
                let j = match mode {
                    Mode::FixedPoint => None,
                    Mode::Newton => Some(&k + el.newton(kappa_u, &zl)?),
                };
                Ok((k, j, el.load(f)))
            })
            .collect::<Result<Vec<Local>, _>>()?;
        let mut ktrip = Vec::new();
        let mut jtrip = Vec::new();
        let mut load = vec![0.0; n];
        for (c, (k, j, l)) in locals.iter().enumerate() {
            let map = self.dofmap.local_to_global(c);
            for (a, &ga) in map.iter().enumerate() {
                load[ga] += l[a];
                for (b, &gb) in map.iter().enumerate() {
                    ktrip.push((ga, gb, k[(a, b)]));
                    if let Some(j) = j {
                        jtrip.push((ga, gb, j[(a, b)]));
                    }
                }
            }
        }
        Ok(GlobalParts {
            stiffness: CsrMatrix::from_triplets(n, ktrip),
            jacobian: (mode == Mode::Newton).then(|| CsrMatrix::from_triplets(n, jtrip)),
            load,
        })
    }

    /// Reduced system on the unconstrained DoFs. Fixed-point mode returns
    /// `A(z)` and the load minus the lifted Dirichlet values; Newton mode
    /// returns `A(z) + B(z)` and the residual `load - A(z) z`, where `z`
    /// is expected to carry the Dirichlet values already.
    pub fn assemble(&self, problem: &ProblemSpec, z: &[f64], mode: Mode) -> Result<(CsrMatrix, Vec<f64>), AssemblyError> {
        let parts = self.assemble_parts(problem, z, mode)?;
        Ok(self.reduce(&parts, z, mode))
    }

    pub fn reduce(&self, parts: &GlobalParts, z: &[f64], mode: Mode) -> (CsrMatrix, Vec<f64>) {
        let keep = self.keep();
        match mode {
            Mode::FixedPoint => {
                let (a, lifted) = parts.stiffness.eliminate(&keep, &self.boundary_values);
                let rhs = self.dofmap.restrict(&parts.load).iter().zip(&lifted).map(|(l, s)| l - s).collect();
                (a, rhs)
            }
            Mode::Newton => {
                let jac = parts.jacobian.as_ref().expect("Newton parts carry a Jacobian");
                let (j, _) = jac.eliminate(&keep, &vec![0.0; z.len()]);
                let az = parts.stiffness.matvec(z);
                let r: Vec<f64> = parts.load.iter().zip(&az).map(|(l, a)| l - a).collect();
                (j, self.dofmap.restrict(&r))
            }
        }
    }
}

/// Reduced global system at iterate `z`.
pub fn assemble_global(
    disc: &Discretization,
    problem: &ProblemSpec,
    z: &[f64],
    mode: Mode,
) -> Result<(CsrMatrix, Vec<f64>), AssemblyError> {
    disc.assemble(problem, z, mode)
}
