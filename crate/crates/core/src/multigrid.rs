//! Parallel geometric multigrid: level hierarchy by uniform refinement,
//! nodal grid transfer on own cells, block-Jacobi SSOR smoothing and a
//! gathered dense coarse solve.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::comm::{Comm, ConsistencyLevel};
use crate::dlinalg::{BlockSsor, DistMatrix, DistVector, Preconditioner};
use crate::error::{Error, Result};
use crate::mapped_fe::ElementKind;
use crate::mesh::{Mesh, CHILD_OFFSETS};
use crate::partition::CellOwnership;
use crate::space::FeSpace;

/// Uniform refinements of `coarse`: `n_levels` meshes, coarse first.
pub fn refine_hierarchy(coarse: Mesh, n_levels: usize) -> Vec<Arc<Mesh>> {
    let mut out = Vec::with_capacity(n_levels);
    let mut current = coarse;
    for _ in 1..n_levels {
        let next = current.refine_uniform();
        out.push(Arc::new(current));
        current = next;
    }
    out.push(Arc::new(current));
    out
}

/// Coarse-to-fine transfer data for one pair of consecutive levels.
#[derive(Debug, Clone)]
struct Transfer {
    /// Own coarse cells: position in the coarse d.o.f. map and positions of
    /// the four children in the fine map.
    cells: Vec<(usize, [usize; 4])>,
    /// `weights[k][f * n + a]`: coarse basis `a` at the node of fine local
    /// d.o.f. `f` of child `k`.
    weights: [Vec<f64>; 4],
    /// Child and fine local index coinciding with each coarse node.
    injection: Vec<(usize, usize)>,
    /// 1 / (number of fine cells containing the d.o.f.).
    inv_count: Vec<f64>,
}

impl Transfer {
    fn new(coarse: &FeSpace, fine: &FeSpace) -> Result<Transfer> {
        let element = coarse.element();
        let n = element.n_dofs();
        let mesh = coarse.mesh();
        let mut cells = Vec::with_capacity(coarse.rank_cells().own.len());
        for &k in &coarse.rank_cells().own {
            let cpos = coarse.dof_map().cell_position(k).expect("own cell is known");
            let children = mesh.cells()[k]
                .child_ids
                .ok_or_else(|| Error::InvalidInput(format!("coarse cell {k} has no children")))?;
            let mut fpos = [0; 4];
            for (slot, child) in fpos.iter_mut().zip(children) {
                *slot = fine
                    .dof_map()
                    .cell_position(child)
                    .ok_or_else(|| Error::InvalidInput(format!("child {child} not known on the fine level")))?;
            }
            cells.push((cpos, fpos));
        }
        let child_point = |k: usize, f: usize| {
            let xi = element.dof_node(f);
            [CHILD_OFFSETS[k][0] + 0.5 * xi[0], CHILD_OFFSETS[k][1] + 0.5 * xi[1]]
        };
        let weights = std::array::from_fn(|k| {
            let mut w = Vec::with_capacity(n * n);
            for f in 0..n {
                w.extend(element.values(child_point(k, f)));
            }
            w
        });
        let mut injection = Vec::with_capacity(n);
        for a in 0..n {
            let node = element.dof_node(a);
            let hit = (0..4)
                .flat_map(|k| (0..n).map(move |f| (k, f)))
                .find(|&(k, f)| {
                    let p = child_point(k, f);
                    (p[0] - node[0]).abs() < 1e-12 && (p[1] - node[1]).abs() < 1e-12
                })
                .expect("coarse nodes are fine nodes");
            injection.push(hit);
        }
        let mut count = vec![0usize; fine.n_dofs()];
        for pos in 0..fine.dof_map().cells().len() {
            for &d in fine.dof_map().cell_dofs_at(pos) {
                count[d] += 1;
            }
        }
        Ok(Transfer {
            cells,
            weights,
            injection,
            inv_count: count.into_iter().map(|c| 1.0 / c as f64).collect(),
        })
    }
}

/// Dense direct solver for the coarsest level, factorized on rank 0.
#[derive(Debug, Clone)]
struct CoarseSolver {
    global_index: Vec<usize>,
    n_global: usize,
    lu: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl CoarseSolver {
    fn new(a: &DistMatrix) -> Result<CoarseSolver> {
        let space = Arc::clone(a.space());
        let comm = space.comm();
        let masters: Vec<usize> = space.classification().masters().collect();
        let counts = comm.all_gather(masters.len());
        let offset: usize = counts[..comm.rank()].iter().sum();
        let n_global: usize = counts.iter().sum();
        let mut gid = DistVector::zeros(&space);
        for (k, &d) in masters.iter().enumerate() {
            gid.values_mut()[d] = (offset + k) as f64;
        }
        gid.set_level(ConsistencyLevel::L0);
        gid.restore(ConsistencyLevel::L3);
        let global_index: Vec<usize> = gid.values().iter().map(|&v| v as usize).collect();

        let rows: Vec<(usize, Vec<(usize, f64)>)> = masters
            .iter()
            .map(|&i| (global_index[i], a.row(i).map(|(j, v)| (global_index[j], v)).collect()))
            .collect();
        let gathered = comm.gather(0, rows);
        let mut ok = true;
        let lu = gathered.map(|parts| {
            let mut m = DMatrix::<f64>::zeros(n_global, n_global);
            for (row, entries) in parts.into_iter().flatten() {
                for (col, v) in entries {
                    m[(row, col)] += v;
                }
            }
            let lu = m.lu();
            ok = lu.is_invertible();
            lu
        });
        if !comm.broadcast(0, (comm.rank() == 0).then_some(ok)) {
            return Err(Error::SingularCoarse);
        }
        Ok(CoarseSolver {
            global_index,
            n_global,
            lu,
        })
    }

    /// Exact solve; result is L3. Collective.
    fn solve(&self, b: &DistVector) -> Result<DistVector> {
        let space = Arc::clone(b.space());
        let comm = space.comm();
        let local: Vec<(usize, f64)> = space
            .classification()
            .masters()
            .map(|d| (self.global_index[d], b.values()[d]))
            .collect();
        let gathered = comm.gather(0, local);
        let solution = match (&self.lu, gathered) {
            (Some(lu), Some(parts)) => {
                let mut rhs = DVector::<f64>::zeros(self.n_global);
                for (g, v) in parts.into_iter().flatten() {
                    rhs[g] = v;
                }
                let x = lu.solve(&rhs).map(|x| x.as_slice().to_vec());
                Some(x)
            }
            _ => None,
        };
        let x = comm.broadcast(0, solution).ok_or(Error::SingularCoarse)?;
        let values = self.global_index.iter().map(|&g| x[g]).collect();
        DistVector::from_values(&space, values, ConsistencyLevel::L3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgParams {
    pub nu1: usize,
    pub nu2: usize,
    pub omega: f64,
}

impl Default for MgParams {
    fn default() -> Self {
        MgParams {
            nu1: 2,
            nu2: 2,
            omega: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MgLevel {
    pub index: usize,
    pub space: Arc<FeSpace>,
    pub matrix: DistMatrix,
    pub dirichlet: Vec<bool>,
    smoother: BlockSsor,
    /// Transfer from the next coarser level; `None` on the coarsest.
    transfer: Option<Transfer>,
}

/// Residual norms seen on one level during one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    pub level: usize,
    pub pre_residual: f64,
    pub post_residual: f64,
}

#[derive(Debug)]
pub struct MgHierarchy {
    levels: Vec<MgLevel>,
    params: MgParams,
    coarse: CoarseSolver,
    diagnostics: Option<Vec<CycleRecord>>,
    cycles: usize,
}

/// Produces the operator and Dirichlet mask of one level.
pub type OperatorBuilder<'a> = dyn FnMut(&Arc<FeSpace>) -> Result<(DistMatrix, Vec<bool>)> + 'a;

/// Builds spaces, transfers, operators (rediscretized per level) and the
/// coarse factorization. Cells inherit the owner of their coarse ancestor.
/// Collective.
pub fn build_hierarchy(
    comm: &Comm,
    coarse_mesh: Mesh,
    coarse_ownership: CellOwnership,
    n_levels: usize,
    kind: ElementKind,
    params: MgParams,
    builder: &mut OperatorBuilder<'_>,
) -> Result<MgHierarchy> {
    if n_levels == 0 {
        return Err(Error::InvalidInput("a hierarchy needs at least one level".into()));
    }
    let meshes = refine_hierarchy(coarse_mesh, n_levels);
    let mut ownership = coarse_ownership;
    let mut levels: Vec<MgLevel> = Vec::with_capacity(n_levels);
    for (index, mesh) in meshes.into_iter().enumerate() {
        if index > 0 {
            ownership = ownership.refine();
        }
        let space = FeSpace::new(comm, mesh, ownership.clone(), kind)?;
        let (matrix, dirichlet) = builder(&space)?;
        let smoother = BlockSsor::new(&matrix, params.omega)?;
        let transfer = match levels.last() {
            Some(prev) => Some(Transfer::new(&prev.space, &space)?),
            None => None,
        };
        levels.push(MgLevel {
            index,
            space,
            matrix,
            dirichlet,
            smoother,
            transfer,
        });
    }
    let coarse = CoarseSolver::new(&levels[0].matrix)?;
    Ok(MgHierarchy {
        levels,
        params,
        coarse,
        diagnostics: None,
        cycles: 0,
    })
}

impl MgHierarchy {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, index: usize) -> Result<&MgLevel> {
        self.levels.get(index).ok_or(Error::LevelOutOfRange {
            level: index,
            n_levels: self.levels.len(),
        })
    }

    pub fn finest(&self) -> &MgLevel {
        self.levels.last().expect("at least one level")
    }

    pub fn params(&self) -> MgParams {
        self.params
    }

    /// Starts recording per-level residual norms (costs extra reductions).
    pub fn enable_diagnostics(&mut self) {
        self.diagnostics = Some(Vec::new());
    }

    pub fn diagnostics(&self) -> &[CycleRecord] {
        self.diagnostics.as_deref().unwrap_or(&[])
    }

    fn transfer(&self, fine: usize) -> Result<&Transfer> {
        self.level(fine)?.transfer.as_ref().ok_or(Error::LevelOutOfRange {
            level: fine,
            n_levels: self.levels.len(),
        })
    }

    /// Nodal interpolation from level `fine - 1` to level `fine`, evaluated
    /// on own coarse cells. Input is raised to L1; output is L1.
    pub fn prolongate(&self, fine: usize, coarse: &DistVector) -> Result<DistVector> {
        let t = self.transfer(fine)?;
        let fine_space = &self.levels[fine].space;
        let coarse_space = &self.levels[fine - 1].space;
        let mut vc = coarse.clone();
        vc.restore(ConsistencyLevel::L1);
        let n = coarse_space.element().n_dofs();
        let mut out = DistVector::zeros(fine_space);
        let mut written = vec![false; fine_space.n_dofs()];
        {
            let vf = out.values_mut();
            for &(cpos, fpos) in &t.cells {
                let cd = coarse_space.dof_map().cell_dofs_at(cpos);
                for (k, &fp) in fpos.iter().enumerate() {
                    let fd = fine_space.dof_map().cell_dofs_at(fp);
                    for (f, &d) in fd.iter().enumerate() {
                        if written[d] {
                            continue;
                        }
                        let w = &t.weights[k][f * n..(f + 1) * n];
                        vf[d] = w.iter().zip(cd).map(|(wa, &c)| wa * vc.values()[c]).sum();
                        written[d] = true;
                    }
                }
            }
        }
        out.set_level(ConsistencyLevel::L0);
        out.restore(ConsistencyLevel::L1);
        Ok(out)
    }

    /// Transpose of [`prolongate`](Self::prolongate): cellwise on own cells,
    /// then interface partial sums are added into masters. Output is L0.
    pub fn restrict_defect(&self, fine: usize, defect: &DistVector) -> Result<DistVector> {
        let t = self.transfer(fine)?;
        let fine_space = &self.levels[fine].space;
        let coarse_space = &self.levels[fine - 1].space;
        let mut d = defect.clone();
        d.restore(ConsistencyLevel::L1);
        let n = coarse_space.element().n_dofs();
        let mut out = DistVector::zeros(coarse_space);
        {
            let vc = out.values_mut();
            for &(cpos, fpos) in &t.cells {
                let cd = coarse_space.dof_map().cell_dofs_at(cpos);
                for (k, &fp) in fpos.iter().enumerate() {
                    let fd = fine_space.dof_map().cell_dofs_at(fp);
                    for (f, &dof) in fd.iter().enumerate() {
                        let val = d.values()[dof] * t.inv_count[dof];
                        let w = &t.weights[k][f * n..(f + 1) * n];
                        for (wa, &c) in w.iter().zip(cd) {
                            vc[c] += wa * val;
                        }
                    }
                }
            }
            coarse_space.mapper().accumulate_interface(coarse_space.comm(), vc);
        }
        out.set_level(ConsistencyLevel::L0);
        Ok(out)
    }

    /// Injection at coarse nodes. Input is raised to L1; output is L1.
    pub fn restrict_function(&self, fine: usize, v: &DistVector) -> Result<DistVector> {
        let t = self.transfer(fine)?;
        let fine_space = &self.levels[fine].space;
        let coarse_space = &self.levels[fine - 1].space;
        let mut vf = v.clone();
        vf.restore(ConsistencyLevel::L1);
        let mut out = DistVector::zeros(coarse_space);
        {
            let vc = out.values_mut();
            for &(cpos, fpos) in &t.cells {
                let cd = coarse_space.dof_map().cell_dofs_at(cpos);
                for (a, &(k, f)) in t.injection.iter().enumerate() {
                    vc[cd[a]] = vf.values()[fine_space.dof_map().cell_dofs_at(fpos[k])[f]];
                }
            }
        }
        out.set_level(ConsistencyLevel::L1);
        Ok(out)
    }

    /// `sweeps` block-Jacobi SSOR steps on level `index`. Output is L2.
    pub fn smooth(&self, index: usize, x: &mut DistVector, b: &DistVector, sweeps: usize) -> Result<()> {
        let level = self.level(index)?;
        level.smoother.smooth(&level.matrix, x, b, sweeps)
    }

    /// Exact solve on the coarsest level. Output is L3.
    pub fn coarse_solve(&self, b: &DistVector) -> Result<DistVector> {
        self.coarse.solve(b)
    }

    /// One V(nu1, nu2)-cycle on level `index` from a zero initial guess.
    pub fn v_cycle(&mut self, index: usize, b: &DistVector) -> Result<DistVector> {
        self.level(index)?;
        if index == 0 {
            return self.coarse.solve(b);
        }
        let MgParams { nu1, nu2, .. } = self.params;
        let pre = self.diagnostics.is_some().then(|| b.norm());
        let mut x = DistVector::zeros(&self.levels[index].space);
        self.smooth(index, &mut x, b, nu1)?;
        let r = self.levels[index].matrix.residual(b, &mut x)?;
        let mut rc = self.restrict_defect(index, &r)?;
        {
            let mask = &self.levels[index - 1].dirichlet;
            for (v, &m) in rc.values_mut().iter_mut().zip(mask) {
                if m {
                    *v = 0.0;
                }
            }
        }
        let ec = self.v_cycle(index - 1, &rc)?;
        let e = self.prolongate(index, &ec)?;
        x.axpy(1.0, &e)?;
        self.smooth(index, &mut x, b, nu2)?;
        if let Some(pre) = pre {
            let post = self.levels[index].matrix.residual(b, &mut x)?.norm();
            let cycle = self.cycles;
            if let Some(d) = self.diagnostics.as_mut() {
                d.push(CycleRecord {
                    cycle,
                    level: index,
                    pre_residual: pre,
                    post_residual: post,
                });
            }
        }
        Ok(x)
    }
}

impl Preconditioner for MgHierarchy {
    fn apply(&mut self, r: &DistVector) -> Result<DistVector> {
        let top = self.levels.len() - 1;
        let x = self.v_cycle(top, r)?;
        self.cycles += 1;
        Ok(x)
    }

    fn name(&self) -> &str {
        "multigrid"
    }
}

/// Writes `cycle,level,pre_residual,post_residual` lines with a header.
pub fn write_cycle_csv(path: &Path, records: &[CycleRecord]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "cycle,level,pre_residual,post_residual")?;
    for r in records {
        writeln!(f, "{},{},{:e},{:e}", r.cycle, r.level, r.pre_residual, r.post_residual)?;
    }
    f.flush()?;
    Ok(())
}
