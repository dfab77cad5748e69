use crate::assembly::{Discretization, GlobalParts, Mode};
use crate::problems::ProblemSpec;

use super::csr::{dot, norm};
use super::linear::{bicgstab_solve, cg_solve};
use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bound on `|u^{n+1} - u^n| / max(1, |u^{n+1}|)` in the discrete l2
    /// norm `|v| = sqrt(sum v_i^2 / N)` over all `N` DoFs.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative residual target of each linear solve.
    pub linear_tol: f64,
    /// Iteration cap of each linear solve; `None` means `10 n + 100`.
    pub linear_max_iter: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 50,
            linear_tol: 1e-12,
            linear_max_iter: None,
        }
    }
}

impl SolverOptions {
    fn linear_cap(&self, n: usize) -> usize {
        self.linear_max_iter.unwrap_or(10 * n + 100)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Full global DoF vector, Dirichlet values included.
    pub solution: Vec<f64>,
    pub nonlinear_iterations: usize,
    pub linear_iterations: Vec<usize>,
    pub increments: Vec<f64>,
    /// `(F_n(u^n), F_n(u^{n+1}))` per step with
    /// `F_n(v) = a(u^n; v, v) - 2 (f, v)`. Empty for Newton.
    pub energies: Vec<(f64, f64)>,
    pub converged: bool,
}

fn initial_iterate(disc: &Discretization, u0: Option<&[f64]>) -> Vec<f64> {
    let g = disc.boundary_values();
    let interior = match u0 {
        Some(u) => disc.dofmap().restrict(u),
        None => vec![0.0; disc.dofmap().n_interior()],
    };
    disc.dofmap().expand(&interior, g)
}

fn relative_increment(delta: &[f64], next: &[f64]) -> f64 {
    let scale = (next.len().max(1) as f64).sqrt();
    (norm(delta) / scale) / (norm(next) / scale).max(1.0)
}

fn energy(parts: &GlobalParts, v: &[f64]) -> f64 {
    dot(v, &parts.stiffness.matvec(v)) - 2.0 * dot(&parts.load, v)
}

/// Frozen-coefficient iteration `a(u^n; u^{n+1}, v) = (f, P0_{k-1} v)`,
/// each step solved by CG warm-started at `u^n`.
pub fn fixed_point_solve(
    disc: &Discretization,
    problem: &ProblemSpec,
    opts: &SolverOptions,
    u0: Option<&[f64]>,
) -> Result<SolveReport, SolverError> {
    let dofmap = disc.dofmap();
    let mut u = initial_iterate(disc, u0);
    let mut report = SolveReport {
        solution: Vec::new(),
        nonlinear_iterations: 0,
        linear_iterations: Vec::new(),
        increments: Vec::new(),
        energies: Vec::new(),
        converged: false,
    };
    for step in 1..=opts.max_iter {
        let parts = disc
            .assemble_parts(problem, &u, Mode::FixedPoint)
            .map_err(|source| SolverError::AssemblyStep { step, source })?;
        let (a, rhs) = disc.reduce(&parts, &u, Mode::FixedPoint);
        let x0 = dofmap.restrict(&u);
        let lin = cg_solve(&a, &rhs, Some(&x0), opts.linear_tol, opts.linear_cap(a.dim())).map_err(|e| {
            SolverError::LinearStep {
                step,
                source: Box::new(e),
            }
        })?;
        let next = dofmap.expand(&lin.x, disc.boundary_values());
        let delta: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let inc = relative_increment(&delta, &next);
        report.energies.push((energy(&parts, &u), energy(&parts, &next)));
        report.linear_iterations.push(lin.iterations);
        report.increments.push(inc);
        report.nonlinear_iterations = step;
        log::debug!(
            "fixed point step {step}: increment {inc:.3e}, energy {:.12e} -> {:.12e}, {} CG iterations",
            report.energies[step - 1].0,
            report.energies[step - 1].1,
            lin.iterations
        );
        u = next;
        if inc <= opts.tol {
            report.converged = true;
            break;
        }
    }
    report.solution = u;
    Ok(report)
}

/// Plain Newton iteration on `a(u; u, v) = (f, P0_{k-1} v)`; the
/// nonsymmetric linearisation is solved by BiCGStab.
pub fn newton_solve(
    disc: &Discretization,
    problem: &ProblemSpec,
    opts: &SolverOptions,
    u0: Option<&[f64]>,
) -> Result<SolveReport, SolverError> {
    let dofmap = disc.dofmap();
    let zeros = vec![0.0; dofmap.n_dofs()];
    let mut u = initial_iterate(disc, u0);
    let mut report = SolveReport {
        solution: Vec::new(),
        nonlinear_iterations: 0,
        linear_iterations: Vec::new(),
        increments: Vec::new(),
        energies: Vec::new(),
        converged: false,
    };
    for step in 1..=opts.max_iter {
        let (j, r) = disc
            .assemble(problem, &u, Mode::Newton)
            .map_err(|source| SolverError::AssemblyStep { step, source })?;
        let lin = bicgstab_solve(&j, &r, None, opts.linear_tol, opts.linear_cap(j.dim())).map_err(|e| {
            SolverError::LinearStep {
                step,
                source: Box::new(e),
            }
        })?;
        let delta = dofmap.expand(&lin.x, &zeros);
        for (ui, di) in u.iter_mut().zip(&delta) {
            *ui += di;
        }
        let inc = relative_increment(&delta, &u);
        report.linear_iterations.push(lin.iterations);
        report.increments.push(inc);
        report.nonlinear_iterations = step;
        log::debug!("newton step {step}: increment {inc:.3e}, {} BiCGStab iterations", lin.iterations);
        if inc <= opts.tol {
            report.converged = true;
            break;
        }
    }
    report.solution = u;
    Ok(report)
}
