//! Benchmark harness: configuration, per-rank solve drivers, the repeat and
//! timing protocol, and report tables.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{apply_dirichlet, assemble_cdr, assemble_mass, dirichlet_mask, l2_error, CrankNicolson};
use crate::comm::{Comm, Universe};
use crate::dlinalg::{
    fgmres, DistMatrix, DistVector, FgmresOptions, IterationRecord, Preconditioner, SolveResult, SsorPreconditioner,
};
use crate::error::{Error, Result};
use crate::mapped_fe::ElementKind;
use crate::mesh::Mesh;
use crate::multigrid::{build_hierarchy, refine_hierarchy, MgHierarchy, MgParams};
use crate::partition::{coord_key, decompose, CellOwnership, CoordKey};
use crate::problems::ProblemKind;
use crate::space::FeSpace;
use crate::vtk::{master_values, merge_masters, write_merged, write_solution_vtk};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    /// FGMRES preconditioned by one multigrid V-cycle.
    MgFgmres,
    /// FGMRES preconditioned by one block-Jacobi SSOR sweep.
    SsorFgmres,
    /// FGMRES preconditioned by a dense LU of the full system.
    CoarseDirect,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::MgFgmres => "mg-fgmres",
            SolverKind::SsorFgmres => "ssor-fgmres",
            SolverKind::CoarseDirect => "coarse-direct",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_lowercase();
        match key.as_str() {
            "mgfgmres" | "mg" => Ok(SolverKind::MgFgmres),
            "ssorfgmres" | "ssor" => Ok(SolverKind::SsorFgmres),
            "coarsedirect" | "direct" => Ok(SolverKind::CoarseDirect),
            _ => Err(Error::InvalidInput(format!("unknown solver '{s}'"))),
        }
    }
}

pub fn parse_element(s: &str) -> Result<ElementKind> {
    match s.to_ascii_uppercase().as_str() {
        "Q1" => Ok(ElementKind::Q1),
        "Q2" => Ok(ElementKind::Q2),
        _ => Err(Error::InvalidInput(format!("unknown element '{s}'"))),
    }
}

/// Largest system the dense direct solver accepts.
pub const MAX_DIRECT_DOFS: usize = 6000;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub element: ElementKind,
    /// Finest refinement level; the coarse mesh is level 0.
    pub levels: usize,
    pub n_ranks: usize,
    pub solver: SolverKind,
    pub nu1: usize,
    pub nu2: usize,
    pub omega: f64,
    pub restart: usize,
    pub tol: f64,
    pub maxit: usize,
    pub dt: f64,
    pub t_end: f64,
    pub repeats: usize,
    /// Drives a random initial guess for stationary problems.
    pub seed: Option<u64>,
    /// For the transient problem: solve the stationary problem with the
    /// boundary data of this time instead of time stepping.
    pub steady_time: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(problem: ProblemKind) -> RunConfig {
        RunConfig {
            problem,
            element: ElementKind::Q1,
            levels: problem.default_levels(),
            n_ranks: 1,
            solver: SolverKind::MgFgmres,
            nu1: 2,
            nu2: 2,
            omega: problem.default_omega(),
            restart: 50,
            tol: 1e-10,
            maxit: 1000,
            dt: 1e-2,
            t_end: 3.0,
            repeats: 1,
            seed: None,
            steady_time: None,
            out_dir: None,
        }
    }

    pub fn is_transient(&self) -> bool {
        self.problem.is_transient() && self.steady_time.is_none()
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    fn n_solves(&self) -> usize {
        if self.is_transient() {
            self.n_steps()
        } else {
            1
        }
    }

    /// Rejects invalid settings; returns warnings for settings that are
    /// ignored by the chosen solver or problem.
    pub fn validate(&self) -> Result<Vec<String>> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if self.n_ranks == 0 {
            return bad("need at least one rank".into());
        }
        if self.restart == 0 || self.maxit == 0 {
            return bad("restart and maxit must be positive".into());
        }
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return bad(format!("omega must lie in (0, 2), got {}", self.omega));
        }
        if self.is_transient() && !(self.dt > 0.0 && self.t_end > 0.0) {
            return bad("dt and t-end must be positive".into());
        }
        let mut warnings = Vec::new();
        if self.solver != SolverKind::MgFgmres && (self.nu1, self.nu2) != (2, 2) {
            warnings.push(format!("nu1/nu2 are ignored by the {} solver", self.solver));
        }
        if self.is_transient() && self.seed.is_some() {
            warnings.push("seed is ignored for time stepping (the previous step is the initial guess)".into());
        }
        Ok(warnings)
    }
}

/// Solver statistics of one linear solve (one time step for transient runs).
#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub step: usize,
    pub time: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub history: Vec<IterationRecord>,
}

/// Everything one rank assembles before solving.
pub struct RankSystem {
    pub space: Arc<FeSpace>,
    pub matrix: DistMatrix,
    pub rhs: DistVector,
    pub mask: Vec<bool>,
    pub hierarchy: Option<MgHierarchy>,
    pub time_stepper: Option<CrankNicolson>,
}

fn fine_level(cfg: &RunConfig, coarse: Mesh, ownership: CellOwnership) -> (Mesh, CellOwnership) {
    let mut meshes = refine_hierarchy(coarse, cfg.levels + 1);
    let fine = meshes.pop().expect("at least one mesh");
    drop(meshes);
    let mesh = Arc::try_unwrap(fine).expect("sole owner of the finest mesh");
    let mut own = ownership;
    for _ in 0..cfg.levels {
        own = own.refine();
    }
    (mesh, own)
}

/// Operator of one level: the stationary operator, or the implicit
/// Crank-Nicolson matrix, with Dirichlet rows.
fn level_operator(cfg: &RunConfig, space: &Arc<FeSpace>) -> Result<(DistMatrix, Vec<bool>)> {
    let problem = cfg.problem;
    let coeffs = problem.coefficients();
    let mask = dirichlet_mask(space, |x| problem.is_dirichlet(x));
    let (a, _) = assemble_cdr(space, &coeffs, None)?;
    let mut matrix = if cfg.is_transient() {
        let m = assemble_mass(space, &coeffs)?;
        CrankNicolson::new(&m, &a, cfg.dt, mask.clone())?.system
    } else {
        a
    };
    apply_dirichlet(Some(&mut matrix), None, &mask, |_| 0.0);
    Ok((matrix, mask))
}

/// Builds space, operator, right-hand side and preconditioner data on one
/// rank. Collective.
pub fn build_rank_system(comm: &Comm, cfg: &RunConfig) -> Result<RankSystem> {
    let coarse = cfg.problem.coarse_mesh()?;
    let ownership = decompose(&coarse, comm.size())?;
    let (space, matrix, mask, hierarchy) = match cfg.solver {
        SolverKind::MgFgmres => {
            let params = MgParams {
                nu1: cfg.nu1,
                nu2: cfg.nu2,
                omega: cfg.omega,
            };
            let mut builder = |s: &Arc<FeSpace>| level_operator(cfg, s);
            let h = build_hierarchy(comm, coarse, ownership, cfg.levels + 1, cfg.element, params, &mut builder)?;
            let fine = h.finest();
            (Arc::clone(&fine.space), fine.matrix.clone(), fine.dirichlet.clone(), Some(h))
        }
        SolverKind::SsorFgmres => {
            let (mesh, own) = fine_level(cfg, coarse, ownership);
            let space = FeSpace::new(comm, Arc::new(mesh), own, cfg.element)?;
            let (matrix, mask) = level_operator(cfg, &space)?;
            (space, matrix, mask, None)
        }
        SolverKind::CoarseDirect => {
            let (mesh, own) = fine_level(cfg, coarse, ownership);
            let params = MgParams {
                nu1: 0,
                nu2: 0,
                omega: cfg.omega,
            };
            let mut builder = |s: &Arc<FeSpace>| {
                let n = s.n_global_dofs();
                if n > MAX_DIRECT_DOFS {
                    return Err(Error::InvalidInput(format!(
                        "{n} d.o.f.s exceed the dense direct solver limit of {MAX_DIRECT_DOFS}"
                    )));
                }
                level_operator(cfg, s)
            };
            let h = build_hierarchy(comm, mesh, own, 1, cfg.element, params, &mut builder)?;
            let fine = h.finest();
            (Arc::clone(&fine.space), fine.matrix.clone(), fine.dirichlet.clone(), Some(h))
        }
    };

    let problem = cfg.problem;
    let coeffs = problem.coefficients();
    let (time_stepper, mut rhs) = if cfg.is_transient() {
        let (a, f) = assemble_cdr(&space, &coeffs, None)?;
        let m = assemble_mass(&space, &coeffs)?;
        (Some(CrankNicolson::new(&m, &a, cfg.dt, mask.clone())?), f)
    } else {
        let (_, f) = assemble_cdr(&space, &coeffs, None)?;
        (None, f)
    };
    let t = cfg.steady_time.unwrap_or(0.0);
    apply_dirichlet(None, Some(&mut rhs), &mask, |x| problem.boundary_value(t, x));
    Ok(RankSystem {
        space,
        matrix,
        rhs,
        mask,
        hierarchy,
        time_stepper,
    })
}

impl RankSystem {
    fn solve(&mut self, cfg: &RunConfig, b: &DistVector, x: &mut DistVector) -> Result<SolveResult> {
        let opts = FgmresOptions {
            restart: cfg.restart,
            tol: cfg.tol,
            maxit: cfg.maxit,
        };
        let result = match &mut self.hierarchy {
            Some(h) => fgmres(&self.matrix, h as &mut dyn Preconditioner, b, x, &opts)?,
            None => {
                let mut pc = SsorPreconditioner::new(&self.matrix, cfg.omega, 1)?;
                fgmres(&self.matrix, &mut pc, b, x, &opts)?
            }
        };
        // Dirichlet rows are identity rows: impose the boundary values exactly
        // instead of up to the solver tolerance.
        let values = x.values_mut();
        for (i, &on) in self.mask.iter().enumerate() {
            if on {
                values[i] = b.values()[i];
            }
        }
        Ok(result)
    }

    /// Initial guess: zero, or seeded pseudo-random values that depend only
    /// on the d.o.f. position (identical for every rank count).
    pub fn initial_guess(&self, seed: Option<u64>) -> DistVector {
        match seed {
            None => DistVector::zeros(&self.space),
            Some(seed) => DistVector::interpolate(&self.space, |x| {
                let (kx, ky) = coord_key(x);
                let mix = (kx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (ky as u64).rotate_left(29);
                ChaCha8Rng::seed_from_u64(seed ^ mix).gen_range(-1.0..1.0)
            }),
        }
    }

    /// Solves the stationary system. Returns statistics and the solution.
    pub fn solve_stationary(&mut self, cfg: &RunConfig) -> Result<(StepStats, DistVector)> {
        let mut x = self.initial_guess(cfg.seed);
        let b = self.rhs.clone();
        let r = self.solve(cfg, &b, &mut x)?;
        Ok((
            StepStats {
                step: 0,
                time: cfg.steady_time.unwrap_or(0.0),
                iterations: r.iterations,
                converged: r.converged,
                final_residual: r.final_residual,
                history: r.history,
            },
            x,
        ))
    }

    /// Crank-Nicolson time stepping from `u = 0`; `observe` sees the
    /// solution after every step.
    pub fn solve_transient(
        &mut self,
        cfg: &RunConfig,
        observe: &mut dyn FnMut(usize, f64, &DistVector) -> Result<()>,
    ) -> Result<(Vec<StepStats>, DistVector)> {
        let cn = self
            .time_stepper
            .clone()
            .ok_or_else(|| Error::InvalidInput("not a transient configuration".into()))?;
        let problem = cfg.problem;
        let f = self.rhs.clone();
        let mut u = DistVector::zeros(&self.space);
        let mut stats = Vec::with_capacity(cfg.n_steps());
        for step in 1..=cfg.n_steps() {
            let t = step as f64 * cfg.dt;
            let b = cn.rhs(&mut u, &f, &f, |x| problem.boundary_value(t, x))?;
            let mut x = u.clone();
            let r = self.solve(cfg, &b, &mut x)?;
            u = x;
            stats.push(StepStats {
                step,
                time: t,
                iterations: r.iterations,
                converged: r.converged,
                final_residual: r.final_residual,
                history: r.history,
            });
            observe(step, t, &u)?;
            if !r.converged {
                break;
            }
        }
        Ok((stats, u))
    }
}

/// Result of one repeat on one rank.
#[derive(Debug, Clone)]
struct RankOutcome {
    steps: Vec<StepStats>,
    seconds: f64,
    masters: Vec<([f64; 2], f64)>,
    l2_error: Option<f64>,
    n_global_dofs: usize,
}

fn rank_run(comm: &Comm, cfg: &RunConfig, write_files: bool) -> Result<RankOutcome> {
    let mut sys = build_rank_system(comm, cfg)?;
    let n_global_dofs = sys.space.n_global_dofs();
    comm.barrier();
    let start = Instant::now();
    let (steps, mut u) = if cfg.is_transient() {
        sys.solve_transient(cfg, &mut |_, _, _| Ok(()))?
    } else {
        let (s, u) = sys.solve_stationary(cfg)?;
        (vec![s], u)
    };
    comm.barrier();
    let seconds = comm.allreduce_max(start.elapsed().as_secs_f64());
    let l2_error = match cfg.problem.exact_solution() {
        Some(exact) => Some(l2_error(&mut u, exact)?),
        None => None,
    };
    if write_files {
        if let Some(dir) = &cfg.out_dir {
            write_solution_vtk(&dir.join(format!("solution_rank{}.vtk", comm.rank())), &sys.space, u.values())?;
        }
    }
    Ok(RankOutcome {
        steps,
        seconds,
        masters: master_values(&sys.space, u.values()),
        l2_error,
        n_global_dofs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatResult {
    /// Total FGMRES iterations (summed over time steps).
    pub iterations: usize,
    pub seconds: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub problem: ProblemKind,
    pub solver: SolverKind,
    pub element: ElementKind,
    pub level: usize,
    pub ranks: usize,
    pub repeats: Vec<RepeatResult>,
    pub n_global_dofs: usize,
    /// Statistics of the last repeat.
    pub steps: Vec<StepStats>,
    pub l2_error: Option<f64>,
    /// Master values of the last repeat, keyed by position.
    pub solution: BTreeMap<CoordKey, ([f64; 2], f64)>,
    pub warnings: Vec<String>,
}

impl RunReport {
    /// Report with synthetic timings, for checking the aggregation rules.
    pub fn synthetic(problem: ProblemKind, solver: SolverKind, level: usize, ranks: usize, seconds: &[f64]) -> RunReport {
        RunReport {
            problem,
            solver,
            element: ElementKind::Q1,
            level,
            ranks,
            repeats: seconds
                .iter()
                .map(|&s| RepeatResult {
                    iterations: 0,
                    seconds: s,
                    converged: true,
                })
                .collect(),
            n_global_dofs: 0,
            steps: Vec::new(),
            l2_error: None,
            solution: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    /// Trimmed-mean wall time over repeats.
    pub fn time(&self) -> f64 {
        let t: Vec<f64> = self.repeats.iter().map(|r| r.seconds).collect();
        trimmed_mean(&t)
    }

    pub fn iterations(&self) -> usize {
        self.repeats.last().map_or(0, |r| r.iterations)
    }

    pub fn converged(&self) -> bool {
        self.repeats.iter().all(|r| r.converged)
    }

    pub fn max_step_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.iterations).max().unwrap_or(0)
    }
}

/// Mean after dropping the fastest and the slowest value (with at least
/// three values; plain mean otherwise).
pub fn trimmed_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let kept = if v.len() >= 3 { &v[1..v.len() - 1] } else { &v[..] };
    kept.iter().sum::<f64>() / kept.len() as f64
}

/// Parallel efficiency relative to the smallest rank count:
/// `r_min t_rmin / (p t_p)`.
pub fn scaling(r_min: usize, t_rmin: f64, p: usize, t_p: f64) -> f64 {
    (r_min as f64 * t_rmin) / (p as f64 * t_p)
}

/// Runs the configured benchmark: every repeat launches `n_ranks` logical
/// ranks, builds the discretization and times the solve.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    let warnings = cfg.validate()?;
    for w in &warnings {
        log::warn!("{w}");
    }
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let universe = Universe::new(cfg.n_ranks);
    let mut repeats = Vec::with_capacity(cfg.repeats);
    let mut last: Vec<RankOutcome> = Vec::new();
    for rep in 0..cfg.repeats {
        let write_files = rep + 1 == cfg.repeats;
        let outcomes: Vec<Result<RankOutcome>> = universe.run(|comm| rank_run(&comm, cfg, write_files));
        let outcomes: Vec<RankOutcome> = outcomes.into_iter().collect::<Result<_>>()?;
        let root = &outcomes[0];
        repeats.push(RepeatResult {
            iterations: root.steps.iter().map(|s| s.iterations).sum(),
            seconds: root.seconds,
            converged: root.steps.iter().all(|s| s.converged) && root.steps.len() == cfg.n_solves(),
        });
        log::info!(
            "repeat {}: {} iterations, {:.3} s",
            rep + 1,
            repeats[rep].iterations,
            repeats[rep].seconds
        );
        last = outcomes;
    }
    let root = &last[0];
    let report = RunReport {
        problem: cfg.problem,
        solver: cfg.solver,
        element: cfg.element,
        level: cfg.levels,
        ranks: cfg.n_ranks,
        repeats,
        n_global_dofs: root.n_global_dofs,
        steps: root.steps.clone(),
        l2_error: root.l2_error,
        solution: merge_masters(last.iter().map(|o| o.masters.clone())),
        warnings,
    };
    if let Some(dir) = &cfg.out_dir {
        write_outputs(dir, &report)?;
    }
    Ok(report)
}

/// Writes `report.csv`, `residuals.csv` and `solution_merged.txt`.
pub fn write_outputs(dir: &Path, report: &RunReport) -> Result<()> {
    let (_, csv) = report_table(std::slice::from_ref(report));
    std::fs::write(dir.join("report.csv"), csv)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("residuals.csv"))?);
    writeln!(f, "step,time,iteration,residual,seconds")?;
    for s in &report.steps {
        for h in &s.history {
            writeln!(f, "{},{},{},{:e},{:.6}", s.step, s.time, h.iteration, h.residual, h.seconds)?;
        }
    }
    f.flush()?;
    write_merged(&dir.join("solution_merged.txt"), &report.solution)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub problem: ProblemKind,
    pub solver: SolverKind,
    pub element: ElementKind,
    pub level: usize,
    pub ranks: usize,
    pub iterations: usize,
    pub time: f64,
    pub speedup: f64,
}

/// One row per report. The speedup column compares each run with the run
/// of the same problem, solver, element and level on the fewest ranks.
pub fn table_rows(reports: &[RunReport]) -> Vec<TableRow> {
    reports
        .iter()
        .map(|r| {
            let base = reports
                .iter()
                .filter(|o| o.problem == r.problem && o.solver == r.solver && o.element == r.element && o.level == r.level)
                .min_by_key(|o| o.ranks)
                .expect("report is in its own group");
            TableRow {
                problem: r.problem,
                solver: r.solver,
                element: r.element,
                level: r.level,
                ranks: r.ranks,
                iterations: r.iterations(),
                time: r.time(),
                speedup: scaling(base.ranks, base.time(), r.ranks, r.time()),
            }
        })
        .collect()
}

/// Aligned text table and CSV of the same rows.
pub fn report_table(reports: &[RunReport]) -> (String, String) {
    let rows = table_rows(reports);
    let mut text = String::new();
    let mut csv = String::from("problem,solver,element,level,ranks,iterations,time,speedup\n");
    let _ = writeln!(
        text,
        "{:<22} {:<14} {:<4} {:>5} {:>5} {:>10} {:>12} {:>8}",
        "problem", "solver", "elem", "level", "ranks", "iterations", "time [s]", "speedup"
    );
    for r in &rows {
        let elem = format!("{:?}", r.element);
        let _ = writeln!(
            text,
            "{:<22} {:<14} {:<4} {:>5} {:>5} {:>10} {:>12.6} {:>8.3}",
            r.problem.name(),
            r.solver.name(),
            elem,
            r.level,
            r.ranks,
            r.iterations,
            r.time,
            r.speedup
        );
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{:.9},{:.6}",
            r.problem.name(),
            r.solver.name(),
            elem,
            r.level,
            r.ranks,
            r.iterations,
            r.time,
            r.speedup
        );
    }
    (text, csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trimmed_mean_rules() {
        assert_eq!(trimmed_mean(&[1.0, 2.0, 3.0, 4.0, 100.0]), 3.0);
        assert_eq!(trimmed_mean(&[5.0]), 5.0);
        assert_eq!(trimmed_mean(&[1.0, 3.0]), 2.0);
        assert_eq!(trimmed_mean(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn single_report_has_unit_speedup() {
        let r = RunReport::synthetic(ProblemKind::Hemker2D, SolverKind::MgFgmres, 2, 4, &[1.5]);
        let rows = table_rows(&[r]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].speedup, 1.0);
    }

    #[test]
    fn equal_times_scale_inversely() {
        let a = RunReport::synthetic(ProblemKind::Hemker2D, SolverKind::MgFgmres, 2, 2, &[1.0]);
        let b = RunReport::synthetic(ProblemKind::Hemker2D, SolverKind::MgFgmres, 2, 8, &[1.0]);
        let rows = table_rows(&[a, b]);
        assert_eq!(rows[1].speedup, 0.25);
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(ProblemKind::PoissonMMS);
        assert!(c.validate().unwrap().is_empty());
        c.solver = SolverKind::SsorFgmres;
        c.nu1 = 3;
        assert_eq!(c.validate().unwrap().len(), 1);
        c.tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::new(ProblemKind::PoissonMMS);
        c.repeats = 0;
        assert!(c.validate().is_err());
        assert_eq!("ssor".parse::<SolverKind>().unwrap(), SolverKind::SsorFgmres);
        assert_eq!(parse_element("q2").unwrap(), ElementKind::Q2);
    }
}
