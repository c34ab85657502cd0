//! Poisson problem with a manufactured solution: FGMRES with a multigrid
//! V-cycle against FGMRES with one SSOR sweep.

use parfem::bench::{run, RunConfig, SolverKind};
use parfem::problems::ProblemKind;

fn main() -> parfem::Result<()> {
    for solver in [SolverKind::MgFgmres, SolverKind::SsorFgmres] {
        for levels in 3..=5 {
            let mut cfg = RunConfig::new(ProblemKind::PoissonMMS);
            cfg.levels = levels;
            cfg.n_ranks = 2;
            cfg.solver = solver;
            let r = run(&cfg)?;
            println!(
                "{:<12} level {levels}: {:6} d.o.f.s {:4} iterations  L2 error {:.3e}  {:.3} s",
                solver.name(),
                r.n_global_dofs,
                r.iterations(),
                r.l2_error.unwrap_or(f64::NAN),
                r.time()
            );
        }
    }
    Ok(())
}
