//! Domain decomposition and d.o.f. classification.
//!
//! Every rank keeps its own cells plus a one-cell-thick halo of foreign
//! cells touching them (by edge or vertex). Own cells touching the halo are
//! dependent, the rest independent. D.o.f.s are classified from their
//! location and from what they couple with; interface d.o.f.s get a unique
//! master rank, the lowest rank owning a cell that contains the d.o.f.

use std::collections::BTreeMap;

use crate::dof_manager::DofMap;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Owner rank per global cell id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellOwnership {
    owner: Vec<usize>,
    n_ranks: usize,
}

impl CellOwnership {
    pub fn new(owner: Vec<usize>, n_ranks: usize) -> Result<CellOwnership> {
        if n_ranks == 0 {
            return Err(Error::InvalidInput("need at least one rank".into()));
        }
        if let Some(bad) = owner.iter().find(|&&r| r >= n_ranks) {
            return Err(Error::InvalidInput(format!("owner rank {bad} >= {n_ranks}")));
        }
        Ok(CellOwnership { owner, n_ranks })
    }

    pub fn owner(&self, cell: usize) -> usize {
        self.owner[cell]
    }

    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    pub fn n_ranks(&self) -> usize {
        self.n_ranks
    }

    pub fn n_cells(&self) -> usize {
        self.owner.len()
    }

    /// Ownership on the next uniform refinement level: children inherit
    /// their parent's owner.
    pub fn refine(&self) -> CellOwnership {
        CellOwnership {
            owner: self.owner.iter().flat_map(|&r| [r; 4]).collect(),
            n_ranks: self.n_ranks,
        }
    }

    pub fn cells_of(&self, rank: usize) -> Vec<usize> {
        (0..self.owner.len()).filter(|&c| self.owner[c] == rank).collect()
    }
}

/// Recursive coordinate bisection of cell barycenters.
///
/// Each step splits along the longer extent of the barycenters (ties go to
/// y), giving `floor(n * left_ranks / ranks)` cells to the lower half.
pub fn decompose(mesh: &Mesh, n_ranks: usize) -> Result<CellOwnership> {
    if n_ranks == 0 || n_ranks > mesh.n_cells() {
        return Err(Error::InvalidInput(format!(
            "cannot split {} cells over {n_ranks} ranks",
            mesh.n_cells()
        )));
    }
    let centers: Vec<[f64; 2]> = (0..mesh.n_cells()).map(|c| mesh.barycenter(c)).collect();
    let mut owner = vec![0; mesh.n_cells()];
    bisect((0..mesh.n_cells()).collect(), 0, n_ranks, &centers, &mut owner);
    CellOwnership::new(owner, n_ranks)
}

fn bisect(mut cells: Vec<usize>, first: usize, n: usize, centers: &[[f64; 2]], owner: &mut [usize]) {
    if n == 1 {
        for c in cells {
            owner[c] = first;
        }
        return;
    }
    let extent = |axis: usize| {
        let (lo, hi) = cells.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
            (lo.min(centers[c][axis]), hi.max(centers[c][axis]))
        });
        hi - lo
    };
    let axis = if extent(0) > extent(1) { 0 } else { 1 };
    cells.sort_by(|&a, &b| {
        centers[a][axis]
            .total_cmp(&centers[b][axis])
            .then(centers[a][1 - axis].total_cmp(&centers[b][1 - axis]))
            .then(a.cmp(&b))
    });
    let n_left = n / 2;
    let split = cells.len() * n_left / n;
    let right = cells.split_off(split);
    bisect(cells, first, n_left, centers, owner);
    bisect(right, first + n_left, n - n_left, centers, owner);
}

/// One rank's view of the decomposition. All lists ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankCells {
    pub rank: usize,
    pub own: Vec<usize>,
    pub halo: Vec<usize>,
    pub dependent: Vec<usize>,
    pub independent: Vec<usize>,
}

impl RankCells {
    /// Own and halo cells, ascending.
    pub fn known(&self) -> Vec<usize> {
        let mut k = self.own.clone();
        k.extend_from_slice(&self.halo);
        k.sort_unstable();
        k
    }
}

pub fn build_rank_cells(mesh: &Mesh, ownership: &CellOwnership, rank: usize) -> Result<RankCells> {
    if ownership.n_cells() != mesh.n_cells() {
        return Err(Error::DimensionMismatch(format!(
            "ownership covers {} cells, mesh has {}",
            ownership.n_cells(),
            mesh.n_cells()
        )));
    }
    let own = ownership.cells_of(rank);
    let mut is_halo = vec![false; mesh.n_cells()];
    let mut dependent = Vec::new();
    let mut independent = Vec::new();
    for &c in &own {
        let mut touches = false;
        for n in mesh.neighbors_by_vertex(c)? {
            if ownership.owner(n) != rank {
                is_halo[n] = true;
                touches = true;
            }
        }
        if touches {
            dependent.push(c);
        } else {
            independent.push(c);
        }
    }
    let halo = (0..mesh.n_cells()).filter(|&c| is_halo[c]).collect();
    Ok(RankCells {
        rank,
        own,
        halo,
        dependent,
        independent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DofClass {
    Independent,
    DependentAlpha,
    DependentBeta,
    InterfaceMaster,
    InterfaceSlave,
    HaloAlpha,
    HaloBeta,
}

impl DofClass {
    pub fn is_master(self) -> bool {
        matches!(
            self,
            DofClass::Independent | DofClass::DependentAlpha | DofClass::DependentBeta | DofClass::InterfaceMaster
        )
    }

    pub fn is_slave(self) -> bool {
        !self.is_master()
    }

    pub fn is_interface(self) -> bool {
        matches!(self, DofClass::InterfaceMaster | DofClass::InterfaceSlave)
    }

    pub fn is_halo(self) -> bool {
        matches!(self, DofClass::HaloAlpha | DofClass::HaloBeta)
    }
}

/// Symmetric d.o.f. adjacency: two d.o.f.s couple iff they share a cell.
/// Columns of each row ascending; every d.o.f. couples with itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Couplings {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Couplings {
    pub fn from_dof_map(dof_map: &DofMap) -> Couplings {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); dof_map.n_dofs()];
        for pos in 0..dof_map.cells().len() {
            let d = dof_map.cell_dofs_at(pos);
            for &i in d {
                rows[i].extend_from_slice(d);
            }
        }
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        Couplings { row_ptr, cols }
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn coupled(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&j).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofClassification {
    pub rank: usize,
    pub classes: Vec<DofClass>,
    /// Lowest owner rank among the cells containing each d.o.f.; known
    /// exactly for every d.o.f. lying in an own cell, `None` for halo d.o.f.s.
    pub master_rank: Vec<Option<usize>>,
    pub couplings: Couplings,
}

impl DofClassification {
    pub fn n_dofs(&self) -> usize {
        self.classes.len()
    }

    pub fn class(&self, dof: usize) -> DofClass {
        self.classes[dof]
    }

    pub fn count(&self, class: DofClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn masters(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.classes.len()).filter(|&d| self.classes[d].is_master())
    }
}

pub fn classify_dofs(
    rank_cells: &RankCells,
    dof_map: &DofMap,
    ownership: &CellOwnership,
) -> Result<DofClassification> {
    let rank = rank_cells.rank;
    let n = dof_map.n_dofs();
    let n_cells = ownership.n_cells();
    let mut cell_kind = vec![0u8; n_cells]; // 1 independent, 2 dependent, 3 halo
    for &c in &rank_cells.independent {
        cell_kind[c] = 1;
    }
    for &c in &rank_cells.dependent {
        cell_kind[c] = 2;
    }
    for &c in &rank_cells.halo {
        cell_kind[c] = 3;
    }

    let mut in_own = vec![false; n];
    let mut in_dep = vec![false; n];
    let mut in_halo = vec![false; n];
    let mut seen = vec![false; n];
    let mut min_owner = vec![usize::MAX; n];
    for (pos, &cell) in dof_map.cells().iter().enumerate() {
        let kind = cell_kind[cell];
        if kind == 0 {
            return Err(Error::InvalidInput(format!(
                "cell {cell} in the d.o.f. map is neither own nor halo on rank {rank}"
            )));
        }
        for &d in dof_map.cell_dofs_at(pos) {
            seen[d] = true;
            in_own[d] |= kind <= 2;
            in_dep[d] |= kind == 2;
            in_halo[d] |= kind == 3;
            min_owner[d] = min_owner[d].min(ownership.owner(cell));
        }
    }

    let mut classes = Vec::with_capacity(n);
    let mut master_rank = Vec::with_capacity(n);
    for d in 0..n {
        if !seen[d] {
            return Err(Error::DofWithoutCell(d));
        }
        let class = if !in_own[d] {
            DofClass::HaloBeta
        } else if !in_dep[d] {
            DofClass::Independent
        } else if !in_halo[d] {
            DofClass::DependentBeta
        } else if min_owner[d] == rank {
            DofClass::InterfaceMaster
        } else {
            DofClass::InterfaceSlave
        };
        classes.push(class);
        master_rank.push(in_own[d].then_some(min_owner[d]));
    }

    let couplings = Couplings::from_dof_map(dof_map);
    let base = classes.clone();
    for d in 0..n {
        let row = couplings.row(d);
        match base[d] {
            DofClass::HaloBeta if row.iter().any(|&j| base[j].is_master()) => {
                classes[d] = DofClass::HaloAlpha;
            }
            DofClass::DependentBeta if row.iter().any(|&j| base[j].is_slave()) => {
                classes[d] = DofClass::DependentAlpha;
            }
            _ => {}
        }
    }

    Ok(DofClassification {
        rank,
        classes,
        master_rank,
        couplings,
    })
}

/// Geometric key used to identify d.o.f.s across ranks in tests.
pub type CoordKey = (i64, i64);

pub fn coord_key(x: [f64; 2]) -> CoordKey {
    ((x[0] * 1e9).round() as i64, (x[1] * 1e9).round() as i64)
}

/// How many ranks claim each d.o.f. (identified by position) as master.
pub fn global_master_census(ranks: &[(&DofClassification, &[[f64; 2]])]) -> BTreeMap<CoordKey, usize> {
    let mut census = BTreeMap::new();
    for (classification, coords) in ranks {
        for (d, class) in classification.classes.iter().enumerate() {
            let count = census.entry(coord_key(coords[d])).or_insert(0);
            if class.is_master() {
                *count += 1;
            }
        }
    }
    census
}
