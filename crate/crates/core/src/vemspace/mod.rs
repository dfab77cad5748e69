//! Degrees of freedom of the conforming virtual element space and the
//! element projectors that can be evaluated from them.
//!
//! Edge moments are taken against powers of the edge parameter running
//! from the lower to the higher global vertex index, so both elements
//! sharing an edge see the same functionals.

mod compensated;
mod dofmap;
mod projectors;

pub use dofmap::{build_dofmap, DofMap, LocalLayout};
pub use projectors::{compute_projectors, interpolate, ElementProjectors};

use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::{element_geometry, ElementGeometry, Point, PolyMesh};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VemError {
    #[error("polynomial degree must be at least 1, got {0}")]
    InvalidDegree(usize),
    #[error("singular Gram system{}", match .cell { Some(c) => format!(" in cell {c}"), None => String::new() })]
    SingularGram { cell: Option<usize> },
}

/// Geometry and projectors of every cell, computed in parallel.
pub fn mesh_projectors(
    mesh: &PolyMesh,
    k: usize,
) -> Result<Vec<(ElementGeometry, ElementProjectors)>, VemError> {
    (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let g = element_geometry(mesh, c);
            let p = compute_projectors(&g, k).map_err(|e| match e {
                VemError::SingularGram { .. } => VemError::SingularGram { cell: Some(c) },
                other => other,
            })?;
            Ok((g, p))
        })
        .collect()
}

/// Global DoF vector of `f`. Shared DoFs are computed from the same
/// canonical edge parametrisation by every adjacent element, so the values
/// written agree bit for bit.
pub fn interpolate_global(
    f: impl Fn(Point) -> f64 + Sync,
    mesh: &PolyMesh,
    dofmap: &DofMap,
) -> Vec<f64> {
    let k = dofmap.degree();
    let locals: Vec<Vec<f64>> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| interpolate(&f, &element_geometry(mesh, c), k))
        .collect();
    let mut out = vec![0.0; dofmap.n_dofs()];
    for (c, local) in locals.iter().enumerate() {
        for (l, &g) in dofmap.local_to_global(c).iter().enumerate() {
            out[g] = local[l];
        }
    }
    out
}
