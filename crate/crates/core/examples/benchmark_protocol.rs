//! Rank sweep with repeated timings: the reported time is the mean without
//! the fastest and slowest repeat, the speedup column is relative to the
//! smallest rank count.

use parfem::bench::{report_table, run, RunConfig, SolverKind};
use parfem::problems::ProblemKind;

fn main() -> parfem::Result<()> {
    let mut reports = Vec::new();
    for ranks in [1, 2, 4] {
        let mut cfg = RunConfig::new(ProblemKind::PoissonMMS);
        cfg.levels = 5;
        cfg.n_ranks = ranks;
        cfg.solver = SolverKind::MgFgmres;
        cfg.repeats = 5;
        reports.push(run(&cfg)?);
    }
    let (table, _) = report_table(&reports);
    print!("{table}");
    Ok(())
}
