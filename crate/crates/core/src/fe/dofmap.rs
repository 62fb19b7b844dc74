use crate::mesh::Mesh;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Two-component Crouzeix-Raviart velocity, one DOF per edge and component.
    CrVector,
    /// Continuous P1 pressure, one DOF per vertex.
    P1Scalar,
    /// Piecewise constants, one DOF per triangle.
    P0Scalar,
}

/// Global numbering of the degrees of freedom of one space.
///
/// CR velocity DOFs are blocked by component: `dof = component * n_edges + edge`.
/// Only CR DOFs on boundary edges are constrained; every other DOF is free and gets
/// a compact index in the reduced (Dirichlet-eliminated) system.
#[derive(Debug, Clone)]
pub struct DofMap {
    kind: SpaceKind,
    entities: usize,
    boundary: Vec<bool>,
    free_index: Vec<Option<usize>>,
    free_dofs: Vec<usize>,
}

impl DofMap {
    pub fn new<T: Real>(mesh: &Mesh<T>, kind: SpaceKind) -> Self {
        let (entities, boundary) = match kind {
            SpaceKind::CrVector => {
                let flags: Vec<bool> = mesh.edges().iter().map(|e| e.boundary).collect();
                (mesh.n_edges(), [flags.clone(), flags].concat())
            }
            SpaceKind::P1Scalar => (mesh.n_vertices(), vec![false; mesh.n_vertices()]),
            SpaceKind::P0Scalar => (mesh.n_triangles(), vec![false; mesh.n_triangles()]),
        };
        let mut free_dofs = Vec::new();
        let free_index = boundary
            .iter()
            .enumerate()
            .map(|(dof, &b)| {
                (!b).then(|| {
                    free_dofs.push(dof);
                    free_dofs.len() - 1
                })
            })
            .collect();
        Self { kind, entities, boundary, free_index, free_dofs }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    /// Total number of DOFs, constrained ones included.
    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    /// Number of mesh entities carrying DOFs (edges, vertices or triangles).
    pub fn entities(&self) -> usize {
        self.entities
    }

    /// Global DOF of a CR velocity component on an edge.
    pub fn cr_dof(&self, component: usize, edge: usize) -> usize {
        debug_assert_eq!(self.kind, SpaceKind::CrVector);
        debug_assert!(component < 2 && edge < self.entities);
        component * self.entities + edge
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary[dof]
    }

    pub fn boundary_dofs(&self) -> impl Iterator<Item = usize> + '_ {
        self.boundary.iter().enumerate().filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }
}
