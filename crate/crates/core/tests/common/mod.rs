#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quasivem::mesh::{ElementGeometry, Point};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lower bound on [`chunkiness`] of the random polygons; every cell of the
/// generated mesh families satisfies it (right triangles sit at 0.167).
pub const MIN_CHUNKINESS: f64 = 0.15;

/// Distance from the centroid to the nearest edge line over the diameter:
/// the radius of a centred disc inside a convex cell, relative to its size.
pub fn chunkiness(g: &ElementGeometry) -> f64 {
    let c = g.centroid;
    g.edges
        .iter()
        .map(|e| ((c[0] - e.start[0]) * e.normal[0] + (c[1] - e.start[1]) * e.normal[1]).abs())
        .fold(f64::INFINITY, f64::min)
        / g.diameter
}

/// Shape-regular convex polygon with 3 to 10 vertices on a randomly placed
/// and scaled circle; angles are jittered around an even spacing and
/// candidates below [`MIN_CHUNKINESS`] are redrawn.
pub fn random_convex_polygon(rng: &mut impl Rng) -> ElementGeometry {
    loop {
        let g = random_convex_polygon_with_aspect(rng, 1.0);
        if chunkiness(&g) >= MIN_CHUNKINESS {
            return g;
        }
    }
}

/// Unfiltered polygon on an ellipse with axis ratio up to `max_aspect`.
pub fn random_convex_polygon_with_aspect(rng: &mut impl Rng, max_aspect: f64) -> ElementGeometry {
    let m = rng.gen_range(3..=10);
    let step = 2.0 * PI / m as f64;
    let offset = rng.gen_range(0.0..2.0 * PI);
    let angles: Vec<f64> = (0..m)
        .map(|i| offset + step * (i as f64 + rng.gen_range(-0.35..0.35)))
        .collect();
    let (a, b) = (1.0, rng.gen_range(1.0..=max_aspect));
    let rot = rng.gen_range(0.0..PI);
    let (cx, cy) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
    let scale = 10f64.powf(rng.gen_range(-2.0..1.0));
    let pts: Vec<Point> = angles
        .iter()
        .map(|t| {
            let (x, y) = (a * t.cos(), b * t.sin());
            [
                cx + scale * (rot.cos() * x - rot.sin() * y),
                cy + scale * (rot.sin() * x + rot.cos() * y),
            ]
        })
        .collect();
    ElementGeometry::from_polygon(&pts)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

pub fn random_vec(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Worst deviations of the projector identities over random convex
/// polygons. Gradient quantities are multiplied by the element diameter so
/// every entry is scale free.
#[derive(Debug, Default, Clone, Copy)]
pub struct ProjectorSuite {
    pub nabla_reproduction: f64,
    pub zero_reproduction: f64,
    pub k1_identity: f64,
    pub commutation: f64,
    pub orthogonality: f64,
}

impl ProjectorSuite {
    fn merge(&mut self, o: &ProjectorSuite) {
        self.nabla_reproduction = self.nabla_reproduction.max(o.nabla_reproduction);
        self.zero_reproduction = self.zero_reproduction.max(o.zero_reproduction);
        self.k1_identity = self.k1_identity.max(o.k1_identity);
        self.commutation = self.commutation.max(o.commutation);
        self.orthogonality = self.orthogonality.max(o.orthogonality);
    }

    pub fn max(&self) -> f64 {
        [self.nabla_reproduction, self.zero_reproduction, self.commutation, self.orthogonality]
            .into_iter()
            .fold(self.k1_identity, f64::max)
    }
}

/// Derivative matrices `N_{k-1} x N_k` of the scaled monomials.
pub fn derivative_matrices(basis: &quasivem::polyquad::MonomialBasis) -> [DMatrix<f64>; 2] {
    let nk = basis.dim();
    let n1 = quasivem::polyquad::dim_poly(basis.degree - 1);
    let mut out = [DMatrix::zeros(n1, nk), DMatrix::zeros(n1, nk)];
    for j in 0..nk {
        let mut c = vec![0.0; nk];
        c[j] = 1.0;
        let g = basis.gradient_coeffs(&c);
        for d in 0..2 {
            for i in 0..n1 {
                out[d][(i, j)] = g[d][i];
            }
        }
    }
    out
}

/// Projector identities of one element at degree `k`.
pub fn projector_checks(geom: &ElementGeometry, k: usize, rng: &mut impl Rng) -> ProjectorSuite {
    use quasivem::polyquad::dim_poly;
    use quasivem::vemspace::compute_projectors;

    let mut out = ProjectorSuite::default();
    let h = geom.diameter;
    let p = compute_projectors(geom, k).expect("convex polygon");
    let nk = dim_poly(k);
    let n1 = dim_poly(k - 1);
    let id = DMatrix::<f64>::identity(nk, nk);
    out.nabla_reproduction = max_abs_diff(&(&p.pinabla * &p.dof_of_poly), &id);
    out.zero_reproduction = max_abs_diff(&(&p.pizero * &p.dof_of_poly), &id);
    if k == 1 {
        out.k1_identity = max_abs_diff(&p.pizero, &p.pinabla);
    }
    let [tx, ty] = derivative_matrices(&p.basis);
    for (g, t) in [(&p.pizero_grad[0], &tx), (&p.pizero_grad[1], &ty)] {
        out.commutation = out.commutation.max(h * max_abs_diff(&(g * &p.dof_of_poly), t));
    }
    // (grad(v - P v), grad m_b) for random v. As grad m_b lies in P_{k-1},
    // (grad v, grad m_b) = (P0 grad v, grad m_b); both sides use the Gram
    // matrix of P_{k-1}. Scaled by h^2 / |E| to be scale free.
    let lower = p.mass.view((0, 0), (n1, n1)).into_owned();
    let v = nalgebra::DVector::from_vec(random_vec(rng, p.n_dofs(), -1.0, 1.0));
    let c = &p.pinabla * &v;
    let (gx, gy) = (&p.pizero_grad[0] * &v, &p.pizero_grad[1] * &v);
    let res = tx.transpose() * &lower * (&tx * &c - gx) + ty.transpose() * &lower * (&ty * &c - gy);
    out.orthogonality = res.amax() * h * h / geom.area;
    out
}

pub fn projector_suite(n_polygons: usize, max_degree: usize, seed: u64) -> ProjectorSuite {
    let mut rng = rng(seed);
    let mut out = ProjectorSuite::default();
    for _ in 0..n_polygons {
        let geom = random_convex_polygon(&mut rng);
        for k in 1..=max_degree {
            out.merge(&projector_checks(&geom, k, &mut rng));
        }
    }
    out
}

/// Worst deviations of the local-form properties over the cells of a mesh.
#[derive(Debug, Default, Clone, Copy)]
pub struct LocalFormSuite {
    /// `|a(z; p, v) - int kappa(P0 z) grad p . P0 grad v|` over the sum of
    /// absolute integrand contributions.
    pub consistency: f64,
    /// `|A c| / |A|` for the constant DoF vector `c`.
    pub kernel: f64,
    /// Most negative eigenvalue over the largest.
    pub negative_eig: f64,
    /// Smallest eigenvalue on the complement of the constants over the
    /// largest; positive means the kernel is exactly the constants.
    pub min_nonconstant_eig: f64,
    /// `max |A - A^T| / |A|`.
    pub asymmetry: f64,
}

impl LocalFormSuite {
    pub fn merge(&mut self, o: &LocalFormSuite, first: bool) {
        self.consistency = self.consistency.max(o.consistency);
        self.kernel = self.kernel.max(o.kernel);
        self.negative_eig = self.negative_eig.max(o.negative_eig);
        self.asymmetry = self.asymmetry.max(o.asymmetry);
        self.min_nonconstant_eig = if first {
            o.min_nonconstant_eig
        } else {
            self.min_nonconstant_eig.min(o.min_nonconstant_eig)
        };
    }
}

/// `int kappa(P0 z) grad p . (P0 grad v)` by quadrature of exactness
/// `2k + 2`, evaluating every factor from the monomial basis directly.
pub fn consistency_oracle(
    el: &quasivem::assembly::ElementCache,
    kappa: &dyn Fn(f64) -> f64,
    z: &[f64],
    p: &[f64],
    v: &[f64],
) -> (f64, f64) {
    use nalgebra::DVector;
    use quasivem::polyquad::{element_nodes, MonomialBasis};
    let proj = &el.proj;
    let k = proj.degree;
    let lower = MonomialBasis::new(k - 1, proj.basis.center, proj.basis.scale);
    let cz = &proj.pizero * DVector::from_column_slice(z);
    let vv = DVector::from_column_slice(v);
    let (gx, gy) = (&proj.pizero_grad[0] * &vv, &proj.pizero_grad[1] * &vv);
    let (mut sum, mut abs) = (0.0, 0.0);
    for (x, w) in element_nodes(&el.geom, 2 * k + 2) {
        let zq = proj.basis.eval_poly(cz.as_slice(), x);
        let grads = proj.basis.eval_grad(x);
        let (mut px, mut py) = (0.0, 0.0);
        for (a, g) in grads.iter().enumerate() {
            px += p[a] * g[0];
            py += p[a] * g[1];
        }
        let (qx, qy) = (lower.eval_poly(gx.as_slice(), x), lower.eval_poly(gy.as_slice(), x));
        let t = w * kappa(zq) * (px * qx + py * qy);
        sum += t;
        abs += t.abs();
    }
    (sum, abs)
}

/// Local-form checks on one element with the coefficient of the reference
/// quasilinear problem and `triples` random `(p, v, z)`, `z` in `[0, 0.1]`.
pub fn local_form_checks(
    el: &quasivem::assembly::ElementCache,
    triples: usize,
    rng: &mut impl Rng,
) -> LocalFormSuite {
    use nalgebra::{DVector, SymmetricEigen};

    let problem = quasivem::problems::paper_problem();
    let kappa = |t: f64| (problem.kappa)(t);
    let n = el.n_dofs();
    let mut out = LocalFormSuite::default();
    let z = random_vec(rng, n, 0.0, 0.1);
    let a = el.stiffness(&kappa, &z).expect("finite kappa");
    let norm = a.amax();
    let ones = DVector::from_vec(el.proj.constant_dofs());
    out.kernel = (&a * &ones).amax() / (norm * ones.amax());
    out.asymmetry = (&a - a.transpose()).amax() / norm;
    let eig = SymmetricEigen::new(a.clone()).eigenvalues;
    let top = eig.max();
    out.negative_eig = (-eig.min()).max(0.0) / top;
    // Spectrum on the orthogonal complement of the constants.
    let e = ones.normalize();
    let ee = &e * e.transpose();
    let restricted = (DMatrix::identity(n, n) - &ee) * &a * (DMatrix::identity(n, n) - &ee) + ee * top;
    out.min_nonconstant_eig = SymmetricEigen::new(restricted).eigenvalues.min() / top;
    for _ in 0..triples {
        let z = random_vec(rng, n, 0.0, 0.1);
        let p = random_vec(rng, el.proj.basis.dim(), -1.0, 1.0);
        let v = random_vec(rng, n, -1.0, 1.0);
        let a = el.stiffness(&kappa, &z).expect("finite kappa");
        let dp = &el.proj.dof_of_poly * DVector::from_column_slice(&p);
        let lhs = (dp.transpose() * &a * DVector::from_column_slice(&v))[0];
        let (rhs, scale) = consistency_oracle(el, &kappa, &z, &p, &v);
        out.consistency = out.consistency.max((lhs - rhs).abs() / scale);
    }
    out
}

/// [`local_form_checks`] on every cell of `mesh` at degree `k`.
pub fn local_form_suite(
    mesh: &quasivem::mesh::PolyMesh,
    k: usize,
    triples: usize,
    rng: &mut impl Rng,
) -> LocalFormSuite {
    let problem = quasivem::problems::paper_problem();
    let disc = quasivem::assembly::Discretization::new(mesh, k, &problem).expect("discretization");
    let mut out = LocalFormSuite::default();
    for (c, el) in disc.elements().iter().enumerate() {
        out.merge(&local_form_checks(el, triples, rng), c == 0);
    }
    out
}

/// Thresholds shared by the property tests and the acceptance run.
pub fn local_forms_ok(s: &LocalFormSuite) -> bool {
    s.consistency < 1e-10 && s.kernel < 1e-12 && s.negative_eig < 1e-12 && s.min_nonconstant_eig > 1e-12 && s.asymmetry < 1e-13
}

/// Worst relative gap between the analytic Newton matrix `A(z) + B(z)` and
/// central differences (step `step`) of `z -> A(z) z` over `pairs` random
/// (cell, z) pairs drawn from all mesh families at degrees 1 to 3.
pub fn newton_fd_suite(pairs: usize, step: f64, seed: u64) -> f64 {
    use nalgebra::DVector;
    use quasivem::assembly::Discretization;
    use quasivem::mesh::{generate, MeshKind};
    use quasivem::problems::paper_problem;

    let problem = paper_problem();
    let kappa = |t: f64| (problem.kappa)(t);
    let kappa_u = |t: f64| (problem.kappa_u)(t);
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for i in 0..pairs {
        let kind = MeshKind::ALL[i % MeshKind::ALL.len()];
        let k = 1 + i % 3;
        let mesh = generate(kind, 4, seed).expect("mesh");
        let disc = Discretization::new(&mesh, k, &problem).expect("discretization");
        let el = &disc.elements()[rng.gen_range(0..mesh.n_cells())];
        let n = el.n_dofs();
        let z = random_vec(&mut rng, n, 0.0, 0.1);
        let residual = |z: &[f64]| el.stiffness(&kappa, z).expect("finite kappa") * DVector::from_column_slice(z);
        let analytic = el.stiffness(&kappa, &z).unwrap() + el.newton(&kappa_u, &z).unwrap();
        let mut fd = DMatrix::zeros(n, n);
        for j in 0..n {
            let (mut zp, mut zm) = (z.clone(), z.clone());
            zp[j] += step;
            zm[j] -= step;
            fd.set_column(j, &((residual(&zp) - residual(&zm)) / (2.0 * step)));
        }
        worst = worst.max((&fd - &analytic).amax() / analytic.amax());
    }
    worst
}
