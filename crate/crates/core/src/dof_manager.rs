//! Local-to-global d.o.f. numbering by partition refinement.
//!
//! The set `M` of all local d.o.f.s `(K, i)` of the known cells starts as the
//! finest partition (every local d.o.f. on its own). For every pair of
//! neighboring cells `K`, `K'` with `id(K) < id(K')` the local
//! identifications are derived from the d.o.f. locations on the reference
//! cell (shared vertex, shared edge with orientation) and merged into the
//! partition. Each resulting class becomes one global d.o.f.

use crate::error::{Error, Result};
use crate::mapped_fe::{ElementKind, LocalElement, ReferenceMap};
use crate::mesh::{Mesh, CELL_EDGES};

/// Disjoint sets with path compression and union by rank.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = i;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Merges the classes of `a` and `b`; returns `false` if already merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// A local d.o.f. `(K, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalDof {
    pub cell_id: usize,
    pub local_index: usize,
}

/// The map `F` from local d.o.f.s of the known cells to `0..n_global`.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    element: LocalElement,
    n_global: usize,
    /// Known cell ids, ascending.
    cells: Vec<usize>,
    /// Global cell id -> position in `cells`.
    position: Vec<Option<usize>>,
    /// `cells.len() * n_local` global indices.
    dofs: Vec<usize>,
}

impl DofMap {
    pub fn n_dofs(&self) -> usize {
        self.n_global
    }

    pub fn kind(&self) -> ElementKind {
        self.element.kind
    }

    pub fn element(&self) -> &LocalElement {
        &self.element
    }

    pub fn n_local(&self) -> usize {
        self.element.n_dofs()
    }

    /// Known cells, ascending by global id.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn contains_cell(&self, cell: usize) -> bool {
        self.position.get(cell).is_some_and(Option::is_some)
    }

    pub fn cell_position(&self, cell: usize) -> Option<usize> {
        self.position.get(cell).copied().flatten()
    }

    pub fn cell_dofs(&self, cell: usize) -> Option<&[usize]> {
        self.cell_position(cell).map(|p| self.cell_dofs_at(p))
    }

    /// Global indices of the cell at position `pos` of [`DofMap::cells`].
    pub fn cell_dofs_at(&self, pos: usize) -> &[usize] {
        let n = self.n_local();
        &self.dofs[pos * n..(pos + 1) * n]
    }

    pub fn global(&self, dof: LocalDof) -> Option<usize> {
        self.cell_dofs(dof.cell_id).map(|d| d[dof.local_index])
    }

    /// Every local d.o.f. of every global d.o.f., sorted by `(cell, index)`.
    pub fn dof_cells(&self) -> Vec<Vec<LocalDof>> {
        let mut out = vec![Vec::new(); self.n_global];
        for (pos, &cell_id) in self.cells.iter().enumerate() {
            for (local_index, &g) in self.cell_dofs_at(pos).iter().enumerate() {
                out[g].push(LocalDof { cell_id, local_index });
            }
        }
        out
    }
}

/// Local identifications between two neighboring cells.
fn local_identifications(mesh: &Mesh, element: &LocalElement, k: usize, kp: usize) -> Vec<(usize, usize)> {
    let vk = mesh.cells()[k].vertex_ids;
    let vkp = mesh.cells()[kp].vertex_ids;
    let mut pairs = Vec::new();
    for (a, va) in vk.iter().enumerate() {
        if let Some(b) = vkp.iter().position(|vb| vb == va) {
            pairs.push((element.vertex_dof(a), element.vertex_dof(b)));
        }
    }
    for (e, (a, b)) in CELL_EDGES.into_iter().enumerate() {
        let (s, t) = (vk[a], vk[b]);
        for (ep, (ap, bp)) in CELL_EDGES.into_iter().enumerate() {
            let (sp, tp) = (vkp[ap], vkp[bp]);
            let same = s == sp && t == tp;
            let reversed = s == tp && t == sp;
            if !(same || reversed) {
                continue;
            }
            let dk = element.edge_dofs(e);
            let dkp = element.edge_dofs(ep);
            let n = dk.len();
            for (p, &i) in dk.iter().enumerate() {
                let q = if same { p } else { n - 1 - p };
                pairs.push((i, dkp[q]));
            }
        }
    }
    pairs
}

/// Builds `F` on the known cells `cells` (any order, duplicates ignored).
pub fn build_dof_map(mesh: &Mesh, cells: &[usize], kind: ElementKind) -> Result<DofMap> {
    build_dof_map_with_order(mesh, cells, kind, false)
}

/// Same as [`build_dof_map`] for a per-cell element list; all entries must
/// agree since a space carries a single element type.
pub fn build_dof_map_per_cell(mesh: &Mesh, cells: &[usize], kinds: &[ElementKind]) -> Result<DofMap> {
    if cells.len() != kinds.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} cells but {} element kinds",
            cells.len(),
            kinds.len()
        )));
    }
    let kind = *kinds.first().ok_or_else(|| Error::InvalidInput("no cells".into()))?;
    if kinds.iter().any(|&k| k != kind) {
        return Err(Error::MixedElements);
    }
    build_dof_map(mesh, cells, kind)
}

/// `reverse_pairs` walks neighbor pairs in reverse order; the classes must
/// not depend on it.
pub(crate) fn build_dof_map_with_order(
    mesh: &Mesh,
    cells: &[usize],
    kind: ElementKind,
    reverse_pairs: bool,
) -> Result<DofMap> {
    let element = LocalElement::new(kind);
    let n_local = element.n_dofs();
    let mut known: Vec<usize> = cells.to_vec();
    known.sort_unstable();
    known.dedup();
    let mut position = vec![None; mesh.n_cells()];
    for (p, &c) in known.iter().enumerate() {
        mesh.cell(c)?;
        position[c] = Some(p);
    }

    let mut pairs = Vec::new();
    for (p, &k) in known.iter().enumerate() {
        for kp in mesh.neighbors_by_vertex(k)? {
            if k < kp {
                if let Some(pp) = position[kp] {
                    pairs.push((p, k, pp, kp));
                }
            }
        }
    }
    if reverse_pairs {
        pairs.reverse();
    }

    let mut partition = UnionFind::new(known.len() * n_local);
    for (p, k, pp, kp) in pairs {
        for (i, j) in local_identifications(mesh, &element, k, kp) {
            partition.union(p * n_local + i, pp * n_local + j);
        }
    }

    // Classes are numbered in order of their smallest (cell, index) member.
    let mut label = vec![usize::MAX; partition.len()];
    let mut dofs = Vec::with_capacity(partition.len());
    let mut n_global = 0;
    for m in 0..partition.len() {
        let root = partition.find(m);
        if label[root] == usize::MAX {
            label[root] = n_global;
            n_global += 1;
        }
        dofs.push(label[root]);
    }

    Ok(DofMap {
        element,
        n_global,
        cells: known,
        position,
        dofs,
    })
}

/// Physical position of every global d.o.f.; all cells containing a d.o.f.
/// must agree on it to 1e-12.
pub fn dof_coordinates(dof_map: &DofMap, mesh: &Mesh) -> Result<Vec<[f64; 2]>> {
    let element = dof_map.element();
    let mut coords: Vec<Option<[f64; 2]>> = vec![None; dof_map.n_dofs()];
    for (pos, &cell) in dof_map.cells().iter().enumerate() {
        let map = ReferenceMap::from_vertices(mesh.cell_coords(cell));
        for (i, &g) in dof_map.cell_dofs_at(pos).iter().enumerate() {
            let x = map.eval(element.dof_node(i));
            match coords[g] {
                None => coords[g] = Some(x),
                Some(y) => {
                    let err = (x[0] - y[0]).abs().max((x[1] - y[1]).abs());
                    let scale = 1.0f64.max(y[0].abs()).max(y[1].abs());
                    if err > 1e-12 * scale {
                        return Err(Error::DofCoordinateMismatch(err));
                    }
                }
            }
        }
    }
    coords
        .into_iter()
        .enumerate()
        .map(|(g, c)| c.ok_or(Error::DofWithoutCell(g)))
        .collect()
}
