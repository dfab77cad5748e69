//! Refinement studies: projection-based errors, DoF-based convergence
//! orders and the CSV table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use thiserror::Error;

use crate::assembly::{AssemblyError, Discretization, Mode};
use crate::mesh::{generate, read_mesh, MeshError, MeshKind, PolyMesh};
use crate::problems::{exact_norms_on, ProblemError, ProblemSpec};
use crate::solver::{fixed_point_solve, newton_solve, SolveReport, SolverError, SolverOptions};

pub const CSV_HEADER: &str = "level,ndof,h,err_l2_rel,err_h1_rel,eoc_l2,eoc_h1,fp_iters,nr_iters";

#[derive(Debug, Error)]
pub enum ConvergenceError {
    #[error("error and DoF count must be positive (error {err}, ndof {ndof})")]
    NonPositive { err: f64, ndof: usize },
    #[error("at least 2 refinement levels are needed, got {0}")]
    TooFewLevels(usize),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("level {level}: {source}")]
    Mesh {
        level: usize,
        #[source]
        source: MeshError,
    },
    #[error("level {level}: {source}")]
    Assembly {
        level: usize,
        #[source]
        source: AssemblyError,
    },
    #[error("level {level}: {source}")]
    Solver {
        level: usize,
        #[source]
        source: SolverError,
    },
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Errors of `P0_k u_h` and `P0_{k-1} grad u_h` against the exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1: f64,
    pub l2_rel: f64,
    pub h1_rel: f64,
}

/// Quadrature exactness for the normalisers; see [`crate::problems`].
pub fn compute_errors(
    disc: &Discretization,
    mesh: &PolyMesh,
    u_h: &[f64],
    problem: &ProblemSpec,
) -> Result<ErrorNorms, ProblemError> {
    let (Some(u), Some(grad)) = (&problem.exact_u, &problem.exact_grad) else {
        return Err(ProblemError::MissingExact(problem.name.clone()));
    };
    let (norm_u, norm_grad) = exact_norms_on(problem, mesh)?;
    let (mut l2, mut h1) = (0.0, 0.0);
    for (c, el) in disc.elements().iter().enumerate() {
        let z = DVector::from_vec(disc.gather(c, u_h));
        let uq = el.values_at_nodes(&(&el.proj.pizero * &z));
        let gxq = el.values_at_nodes(&(&el.proj.pizero_grad[0] * &z));
        let gyq = el.values_at_nodes(&(&el.proj.pizero_grad[1] * &z));
        for (q, (x, w)) in el.nodes().iter().enumerate() {
            let d = grad(*x);
            l2 += w * (u(*x) - uq[q]).powi(2);
            h1 += w * ((d[0] - gxq[q]).powi(2) + (d[1] - gyq[q]).powi(2));
        }
    }
    let (l2, h1) = (l2.sqrt(), h1.sqrt());
    Ok(ErrorNorms {
        l2,
        h1,
        l2_rel: l2 / norm_u,
        h1_rel: h1 / norm_grad,
    })
}

/// `log(e_prev / e_curr) / log(sqrt(ndof_curr / ndof_prev))`.
pub fn eoc(prev: (f64, usize), curr: (f64, usize)) -> Result<f64, ConvergenceError> {
    for &(err, ndof) in &[prev, curr] {
        if err <= 0.0 || ndof == 0 {
            return Err(ConvergenceError::NonPositive { err, ndof });
        }
    }
    Ok((prev.0 / curr.0).ln() / (curr.1 as f64 / prev.1 as f64).sqrt().ln())
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Generated(MeshKind),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    FixedPoint,
    Newton,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub mesh: MeshSource,
    pub n0: usize,
    pub levels: usize,
    pub degree: usize,
    pub solver: SolverChoice,
    pub options: SolverOptions,
    pub seed: u64,
    pub absolute_errors: bool,
    /// Directory receiving projector and system dumps.
    pub dump_dir: Option<PathBuf>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            mesh: MeshSource::Generated(MeshKind::Voronoi),
            n0: 8,
            levels: 5,
            degree: 1,
            solver: SolverChoice::Both,
            options: SolverOptions::default(),
            seed: 0,
            absolute_errors: false,
            dump_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub level: usize,
    /// Unconstrained DoFs.
    pub ndof: usize,
    pub h: f64,
    pub err_l2_rel: f64,
    pub err_h1_rel: f64,
    pub eoc_l2: Option<f64>,
    pub eoc_h1: Option<f64>,
    pub fp_iters: Option<usize>,
    pub nr_iters: Option<usize>,
}

/// Everything produced for one refinement level.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub record: ConvergenceRecord,
    pub errors: ErrorNorms,
    pub fixed_point: Option<SolveReport>,
    pub newton: Option<SolveReport>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub levels: Vec<LevelResult>,
}

impl ConvergenceStudy {
    pub fn records(&self) -> Vec<ConvergenceRecord> {
        self.levels.iter().map(|l| l.record.clone()).collect()
    }

    /// True when every nonlinear solve met its tolerance.
    pub fn converged(&self) -> bool {
        self.levels
            .iter()
            .flat_map(|l| l.fixed_point.iter().chain(l.newton.iter()))
            .all(|r| r.converged)
    }

    pub fn to_csv(&self) -> String {
        records_to_csv(&self.records())
    }
}

pub fn records_to_csv(records: &[ConvergenceRecord]) -> String {
    let opt_f = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.4}"));
    let opt_u = |v: Option<usize>| v.map_or(String::new(), |x| x.to_string());
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{:.6e},{:.6e},{:.6e},{},{},{},{}",
            r.level,
            r.ndof,
            r.h,
            r.err_l2_rel,
            r.err_h1_rel,
            opt_f(r.eoc_l2),
            opt_f(r.eoc_h1),
            opt_u(r.fp_iters),
            opt_u(r.nr_iters)
        );
    }
    s
}

fn level_mesh(config: &ConvergenceConfig, level: usize) -> Result<PolyMesh, ConvergenceError> {
    let mesh = match &config.mesh {
        MeshSource::Generated(kind) => generate(*kind, config.n0 << level, config.seed),
        MeshSource::File(path) => read_mesh(path),
    };
    mesh.map_err(|source| ConvergenceError::Mesh { level, source })
}

fn dump(dir: &Path, level: usize, disc: &Discretization, system: &str) -> Result<(), ConvergenceError> {
    let io = |path: PathBuf| move |source| ConvergenceError::Io { path, source };
    let level_dir = dir.join(format!("level{level}"));
    fs::create_dir_all(&level_dir).map_err(io(level_dir.clone()))?;
    for (c, el) in disc.elements().iter().enumerate() {
        let path = level_dir.join(format!("cell{c}.csv"));
        fs::write(&path, el.proj.to_csv()).map_err(io(path.clone()))?;
    }
    let path = level_dir.join("system.txt");
    fs::write(&path, system).map_err(io(path.clone()))
}

/// Runs the refinement study: `n` doubles per level from `n0` for generated
/// meshes; a mesh file gives a single level.
pub fn run_convergence(config: &ConvergenceConfig, problem: &ProblemSpec) -> Result<ConvergenceStudy, ConvergenceError> {
    let levels = match config.mesh {
        MeshSource::File(_) => 1,
        MeshSource::Generated(_) if config.levels < 2 => return Err(ConvergenceError::TooFewLevels(config.levels)),
        MeshSource::Generated(_) => config.levels,
    };
    let mut out: Vec<LevelResult> = Vec::with_capacity(levels);
    for level in 0..levels {
        let mesh = level_mesh(config, level)?;
        let disc = Discretization::new(&mesh, config.degree, problem)
            .map_err(|source| ConvergenceError::Assembly { level, source })?;
        let solver_err = |source| ConvergenceError::Solver { level, source };
        let fixed_point = match config.solver {
            SolverChoice::FixedPoint | SolverChoice::Both => {
                Some(fixed_point_solve(&disc, problem, &config.options, None).map_err(solver_err)?)
            }
            SolverChoice::Newton => None,
        };
        let newton = match config.solver {
            SolverChoice::Newton | SolverChoice::Both => {
                Some(newton_solve(&disc, problem, &config.options, None).map_err(solver_err)?)
            }
            SolverChoice::FixedPoint => None,
        };
        let solution = &fixed_point.as_ref().or(newton.as_ref()).expect("at least one solver ran").solution;
        let errors = compute_errors(&disc, &mesh, solution, problem)?;
        let (e_l2, e_h1) = if config.absolute_errors {
            (errors.l2, errors.h1)
        } else {
            (errors.l2_rel, errors.h1_rel)
        };
        let ndof = disc.dofmap().n_interior();
        let (eoc_l2, eoc_h1) = match out.last() {
            Some(prev) => {
                let p = &prev.record;
                (
                    eoc((p.err_l2_rel, p.ndof), (e_l2, ndof)).ok(),
                    eoc((p.err_h1_rel, p.ndof), (e_h1, ndof)).ok(),
                )
            }
            None => (None, None),
        };
        if let Some(dir) = &config.dump_dir {
            let (a, _) = disc
                .assemble(problem, solution, Mode::FixedPoint)
                .map_err(|source| ConvergenceError::Assembly { level, source })?;
            dump(dir, level, &disc, &a.to_coordinate_text())?;
        }
        let record = ConvergenceRecord {
            level,
            ndof,
            h: mesh.max_diameter(),
            err_l2_rel: e_l2,
            err_h1_rel: e_h1,
            eoc_l2,
            eoc_h1,
            fp_iters: fixed_point.as_ref().map(|r| r.nonlinear_iterations),
            nr_iters: newton.as_ref().map(|r| r.nonlinear_iterations),
        };
        log::info!(
            "level {level}: ndof {ndof}, h {:.4e}, errors {:.4e} / {:.4e}",
            record.h,
            e_l2,
            e_h1
        );
        out.push(LevelResult {
            record,
            errors,
            fixed_point,
            newton,
        });
    }
    Ok(ConvergenceStudy { levels: out })
}
