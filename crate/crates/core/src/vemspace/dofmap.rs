use crate::mesh::PolyMesh;

use super::VemError;

/// Position of each degree of freedom within one element's local vector:
/// vertex values in ring order, then `k - 1` moments per edge (edge `i`
/// joins ring vertices `i` and `i + 1`), then `k (k - 1) / 2` cell moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalLayout {
    pub n_vertices: usize,
    pub degree: usize,
}

impl LocalLayout {
    pub fn new(n_vertices: usize, degree: usize) -> Self {
        LocalLayout { n_vertices, degree }
    }

    pub fn edge_moments(&self) -> usize {
        self.degree - 1
    }

    pub fn cell_moments(&self) -> usize {
        self.degree * (self.degree - 1) / 2
    }

    pub fn len(&self) -> usize {
        self.n_vertices * self.degree + self.cell_moments()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vertex(&self, i: usize) -> usize {
        i
    }

    pub fn edge(&self, i: usize, j: usize) -> usize {
        self.n_vertices + i * self.edge_moments() + j
    }

    pub fn cell(&self, a: usize) -> usize {
        self.n_vertices * self.degree + a
    }
}

/// Global numbering: vertices, then edge moments, then cell moments, each
/// in mesh order.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    degree: usize,
    n_vertex_dofs: usize,
    n_edge_dofs: usize,
    n_cell_dofs: usize,
    local_to_global: Vec<Vec<usize>>,
    boundary: Vec<bool>,
    /// Index among unconstrained DoFs, or `None` for boundary DoFs.
    interior_index: Vec<Option<usize>>,
    n_interior: usize,
}

pub fn build_dofmap(mesh: &PolyMesh, k: usize) -> Result<DofMap, VemError> {
    if k < 1 {
        return Err(VemError::InvalidDegree(k));
    }
    let nv = mesh.n_vertices();
    let ne = mesh.n_edges();
    let per_edge = k - 1;
    let per_cell = k * (k - 1) / 2;
    let n_edge_dofs = ne * per_edge;
    let n_cell_dofs = mesh.n_cells() * per_cell;
    let total = nv + n_edge_dofs + n_cell_dofs;

    let local_to_global = (0..mesh.n_cells())
        .map(|c| {
            let ring = &mesh.cells()[c];
            let layout = LocalLayout::new(ring.len(), k);
            let mut map = vec![0; layout.len()];
            for (i, &v) in ring.iter().enumerate() {
                map[layout.vertex(i)] = v;
            }
            for (i, &e) in mesh.cell_edges(c).iter().enumerate() {
                for j in 0..per_edge {
                    map[layout.edge(i, j)] = nv + e * per_edge + j;
                }
            }
            for a in 0..per_cell {
                map[layout.cell(a)] = nv + n_edge_dofs + c * per_cell + a;
            }
            map
        })
        .collect();

    let mut boundary = vec![false; total];
    for (v, b) in boundary.iter_mut().enumerate().take(nv) {
        *b = mesh.is_boundary_vertex(v);
    }
    for e in 0..ne {
        if mesh.is_boundary_edge(e) {
            for j in 0..per_edge {
                boundary[nv + e * per_edge + j] = true;
            }
        }
    }
    let mut n_interior = 0;
    let interior_index = boundary
        .iter()
        .map(|&b| {
            if b {
                None
            } else {
                n_interior += 1;
                Some(n_interior - 1)
            }
        })
        .collect();

    Ok(DofMap {
        degree: k,
        n_vertex_dofs: nv,
        n_edge_dofs,
        n_cell_dofs,
        local_to_global,
        boundary,
        interior_index,
        n_interior,
    })
}

impl DofMap {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.boundary.len()
    }

    pub fn n_vertex_dofs(&self) -> usize {
        self.n_vertex_dofs
    }

    pub fn n_edge_dofs(&self) -> usize {
        self.n_edge_dofs
    }

    pub fn n_cell_dofs(&self) -> usize {
        self.n_cell_dofs
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn local_to_global(&self, cell: usize) -> &[usize] {
        &self.local_to_global[cell]
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary[dof]
    }

    pub fn interior_index(&self, dof: usize) -> Option<usize> {
        self.interior_index[dof]
    }

    /// Scatters a vector of unconstrained values into a full DoF vector
    /// whose boundary entries are taken from `boundary_values`.
    pub fn expand(&self, interior: &[f64], boundary_values: &[f64]) -> Vec<f64> {
        (0..self.n_dofs())
            .map(|d| match self.interior_index[d] {
                Some(i) => interior[i],
                None => boundary_values[d],
            })
            .collect()
    }

    /// Gathers the unconstrained entries of a full DoF vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        full.iter()
            .zip(&self.interior_index)
            .filter_map(|(v, i)| i.map(|_| *v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, generate, MeshKind};

    #[test]
    fn square_mesh_counts() {
        let m = generate(MeshKind::Squares, 8, 0).unwrap();
        let d1 = build_dofmap(&m, 1).unwrap();
        assert_eq!((d1.n_dofs(), d1.n_interior()), (81, 49));
        let d2 = build_dofmap(&m, 2).unwrap();
        assert_eq!(d2.n_dofs(), 81 + 144 + 64);
        assert_eq!(d2.n_interior(), 225);
    }

    #[test]
    fn single_cell_local_count() {
        let m = build_mesh(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        let d = build_dofmap(&m, 3).unwrap();
        assert_eq!(d.local_to_global(0).len(), 15);
        assert_eq!(LocalLayout::new(4, 3).len(), 4 + 4 * 2 + 3);
        assert_eq!(d.n_interior(), 3);
    }

    #[test]
    fn shared_edges_share_global_dofs() {
        let m = generate(MeshKind::Voronoi, 4, 2).unwrap();
        let d = build_dofmap(&m, 3).unwrap();
        for (e, edge) in m.edges().iter().enumerate() {
            let [Some(c0), Some(c1)] = edge.cells else { continue };
            let dofs = |c: usize| {
                let li = m.cell_edges(c).iter().position(|&x| x == e).unwrap();
                let layout = LocalLayout::new(m.cells()[c].len(), 3);
                (0..2).map(|j| d.local_to_global(c)[layout.edge(li, j)]).collect::<Vec<_>>()
            };
            assert_eq!(dofs(c0), dofs(c1));
        }
    }

    #[test]
    fn degree_zero_rejected() {
        let m = generate(MeshKind::Squares, 2, 0).unwrap();
        assert_eq!(build_dofmap(&m, 0).unwrap_err(), VemError::InvalidDegree(0));
    }
}
