//! Crank-Nicolson time stepping of the transient plume problem; prints the
//! inflow value and the solution near the outlet every half time unit.

use std::sync::Arc;

use parfem::bench::{build_rank_system, RunConfig};
use parfem::comm::Universe;
use parfem::problems::{inflow_value, ProblemKind};

fn main() -> parfem::Result<()> {
    let cfg = RunConfig::new(ProblemKind::TimeDependentCube2D);
    let probe = [1.0, 0.4375];
    let results = Universe::new(2).run(|comm| -> parfem::Result<Vec<String>> {
        let mut sys = build_rank_system(&comm, &cfg)?;
        let space = Arc::clone(&sys.space);
        let at_probe = space
            .coords()
            .iter()
            .position(|x| (x[0] - probe[0]).abs() < 1e-12 && (x[1] - probe[1]).abs() < 1e-12)
            .filter(|&d| space.is_master(d));
        let mut lines = Vec::new();
        let mut observe = |step: usize, t: f64, u: &parfem::dlinalg::DistVector| {
            if step.is_multiple_of(50) {
                if let Some(d) = at_probe {
                    lines.push(format!("t = {t:4.2}  inflow {:.4}  u(outlet) {:.4}", inflow_value(t), u.values()[d]));
                }
            }
            Ok(())
        };
        let (stats, _) = sys.solve_transient(&cfg, &mut observe)?;
        if comm.rank() == 0 {
            let total: usize = stats.iter().map(|s| s.iterations).sum();
            lines.push(format!("{} steps, {total} FGMRES iterations", stats.len()));
        }
        Ok(lines)
    });
    for r in results {
        for l in r? {
            println!("{l}");
        }
    }
    Ok(())
}
