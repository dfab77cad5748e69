//! Sparse storage, Krylov solvers and the two nonlinear drivers.

mod csr;
mod linear;
mod nonlinear;

pub use csr::CsrMatrix;
pub use linear::{bicgstab_solve, cg_solve, LinearSolution};
pub use nonlinear::{fixed_point_solve, newton_solve, SolveReport, SolverOptions};

use thiserror::Error;

use crate::assembly::AssemblyError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("zero diagonal entry in row {0}")]
    ZeroDiagonal(usize),
    #[error("Krylov breakdown at iteration {iterations}")]
    Breakdown { iterations: usize },
    #[error("no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },
    #[error("linear solve failed in nonlinear step {step}: {source}")]
    LinearStep {
        step: usize,
        #[source]
        source: Box<SolverError>,
    },
    #[error("assembly failed in nonlinear step {step}: {source}")]
    AssemblyStep {
        step: usize,
        #[source]
        source: AssemblyError,
    },
}
