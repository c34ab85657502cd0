//! Rank-local finite element space: everything one rank knows about the
//! distributed discretization on one mesh level.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::comm::{build_fe_mapper, Comm, FeMapper};
use crate::dof_manager::{build_dof_map, dof_coordinates, DofMap};
use crate::error::Result;
use crate::mapped_fe::{DofLocation, ElementKind, LocalElement};
use crate::mesh::{Mesh, CELL_EDGES};
use crate::partition::{build_rank_cells, classify_dofs, coord_key, CellOwnership, CoordKey, DofClassification, RankCells};

/// CSR sparsity of the rank-local matrix.
///
/// Columns of a row are ordered by the canonical key (smallest cell holding
/// both d.o.f.s, local index of the column d.o.f. in it). The key does not
/// depend on the decomposition for master and interface rows, so row sums
/// are evaluated in the same order for every rank count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    /// Position of the diagonal entry of each row in `cols`.
    pub diag: Vec<usize>,
    /// For each known cell (in `DofMap` order), the CSR slot of every local
    /// pair `(a, b)` at `a * n_local + b`.
    pub cell_slots: Vec<Vec<usize>>,
}

impl SparsityPattern {
    pub fn build(dof_map: &DofMap) -> SparsityPattern {
        let n = dof_map.n_dofs();
        let nl = dof_map.n_local();
        let mut rows: Vec<Vec<((usize, usize), usize)>> = vec![Vec::new(); n];
        let mut seen: Vec<HashSet<usize>> = vec![HashSet::new(); n];
        for (pos, &cell) in dof_map.cells().iter().enumerate() {
            let dofs = dof_map.cell_dofs_at(pos);
            for &i in dofs {
                for (b, &j) in dofs.iter().enumerate() {
                    if seen[i].insert(j) {
                        rows[i].push(((cell, b), j));
                    }
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut diag = Vec::with_capacity(n);
        let mut slot_of: Vec<HashMap<usize, usize>> = Vec::with_capacity(n);
        row_ptr.push(0);
        for (i, mut r) in rows.into_iter().enumerate() {
            r.sort_unstable_by_key(|e| e.0);
            let mut map = HashMap::with_capacity(r.len());
            for (_, j) in r {
                if j == i {
                    diag.push(cols.len());
                }
                map.insert(j, cols.len());
                cols.push(j);
            }
            slot_of.push(map);
            row_ptr.push(cols.len());
        }
        let cell_slots = (0..dof_map.cells().len())
            .map(|pos| {
                let dofs = dof_map.cell_dofs_at(pos);
                let mut slots = Vec::with_capacity(nl * nl);
                for &i in dofs {
                    for &j in dofs {
                        slots.push(slot_of[i][&j]);
                    }
                }
                slots
            })
            .collect();
        SparsityPattern {
            row_ptr,
            cols,
            diag,
            cell_slots,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.diag.len()
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }
}

#[derive(Debug)]
pub struct FeSpace {
    comm: Comm,
    mesh: Arc<Mesh>,
    ownership: CellOwnership,
    rank_cells: RankCells,
    dof_map: DofMap,
    classification: DofClassification,
    mapper: FeMapper,
    coords: Vec<[f64; 2]>,
    boundary: Vec<bool>,
    pattern: SparsityPattern,
}

impl FeSpace {
    /// Builds this rank's view of the space. Collective.
    pub fn new(comm: &Comm, mesh: Arc<Mesh>, ownership: CellOwnership, kind: ElementKind) -> Result<Arc<FeSpace>> {
        let rank_cells = build_rank_cells(&mesh, &ownership, comm.rank())?;
        let dof_map = build_dof_map(&mesh, &rank_cells.known(), kind)?;
        let classification = classify_dofs(&rank_cells, &dof_map, &ownership)?;
        let mapper = build_fe_mapper(comm, &classification, &dof_map)?;
        let coords = dof_coordinates(&dof_map, &mesh)?;
        let boundary = boundary_dofs(&mesh, &dof_map);
        let pattern = SparsityPattern::build(&dof_map);
        Ok(Arc::new(FeSpace {
            comm: comm.clone(),
            mesh,
            ownership,
            rank_cells,
            dof_map,
            classification,
            mapper,
            coords,
            boundary,
            pattern,
        }))
    }

    pub fn comm(&self) -> &Comm {
        &self.comm
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn ownership(&self) -> &CellOwnership {
        &self.ownership
    }

    pub fn rank_cells(&self) -> &RankCells {
        &self.rank_cells
    }

    pub fn dof_map(&self) -> &DofMap {
        &self.dof_map
    }

    pub fn element(&self) -> &LocalElement {
        self.dof_map.element()
    }

    pub fn kind(&self) -> ElementKind {
        self.dof_map.kind()
    }

    pub fn classification(&self) -> &DofClassification {
        &self.classification
    }

    pub fn mapper(&self) -> &FeMapper {
        &self.mapper
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    /// Whether each d.o.f. lies on the boundary of the whole domain.
    pub fn on_boundary(&self) -> &[bool] {
        &self.boundary
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_map.n_dofs()
    }

    pub fn is_master(&self, dof: usize) -> bool {
        self.classification.class(dof).is_master()
    }

    /// Number of masters summed over all ranks. Collective.
    pub fn n_global_dofs(&self) -> usize {
        let local = self.classification.masters().count();
        self.comm.all_gather(local).into_iter().sum()
    }

    /// Decomposition-independent key of a d.o.f. (its rounded position).
    pub fn global_key(&self, dof: usize) -> CoordKey {
        coord_key(self.coords[dof])
    }
}

fn boundary_dofs(mesh: &Mesh, dof_map: &DofMap) -> Vec<bool> {
    let mut vertex_on_boundary = vec![false; mesh.n_vertices()];
    for (&(a, b), cells) in mesh.edge_table() {
        if cells.len() == 1 {
            vertex_on_boundary[a] = true;
            vertex_on_boundary[b] = true;
        }
    }
    let element = dof_map.element();
    let mut out = vec![false; dof_map.n_dofs()];
    for (pos, &cell) in dof_map.cells().iter().enumerate() {
        let v = mesh.cells()[cell].vertex_ids;
        for (i, &d) in dof_map.cell_dofs_at(pos).iter().enumerate() {
            let on = match element.dof_location(i) {
                DofLocation::Vertex(k) => vertex_on_boundary[v[k]],
                DofLocation::Edge { edge, .. } => {
                    let (a, b) = CELL_EDGES[edge];
                    mesh.is_boundary_edge(v[a], v[b])
                }
                DofLocation::Interior => false,
            };
            out[d] |= on;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::Universe;
    use crate::mesh::build_rect_mesh;

    #[test]
    fn pattern_matches_couplings_and_is_canonical() {
        let mesh = build_rect_mesh(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        let map = build_dof_map(&mesh, &[0, 1, 2, 3], ElementKind::Q1).unwrap();
        let p = SparsityPattern::build(&map);
        assert_eq!(p.nnz(), 4 * 4 + 4 * 6 + 9); // corners, edge mids, center
        for i in 0..p.n_rows() {
            assert_eq!(p.cols[p.diag[i]], i);
        }
        // center d.o.f. (shared by all cells) couples with all 9, ordered by first cell
        let center = map.cell_dofs(0).unwrap()[3];
        let row: Vec<usize> = p.row(center).map(|k| p.cols[k]).collect();
        assert_eq!(&row[..4], map.cell_dofs(0).unwrap());
    }

    #[test]
    fn boundary_flags() {
        let out = Universe::new(1).run(|c| {
            let mesh = Arc::new(build_rect_mesh(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap());
            let own = CellOwnership::new(vec![0; 4], 1).unwrap();
            let s = FeSpace::new(&c, mesh, own, ElementKind::Q2).unwrap();
            (0..s.n_dofs()).filter(|&d| s.on_boundary()[d]).count()
        });
        assert_eq!(out[0], 16);
    }
}
