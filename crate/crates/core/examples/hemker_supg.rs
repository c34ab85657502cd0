//! SUPG-stabilized Hemker problem on 4 ranks. Writes per-rank VTK files and
//! the merged solution.

use std::path::PathBuf;

use parfem::bench::{run, RunConfig};
use parfem::problems::ProblemKind;

fn main() -> parfem::Result<()> {
    let mut cfg = RunConfig::new(ProblemKind::Hemker2D);
    cfg.levels = 3;
    cfg.n_ranks = 4;
    cfg.out_dir = Some(PathBuf::from("out/hemker_supg"));
    let r = run(&cfg)?;
    let (lo, hi) = r
        .solution
        .values()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, v)| (a.min(v), b.max(v)));
    println!(
        "{} d.o.f.s, {} iterations, converged {}, solution range [{lo:.4}, {hi:.4}]",
        r.n_global_dofs,
        r.iterations(),
        r.converged()
    );
    println!("wrote {}", cfg.out_dir.unwrap().display());
    Ok(())
}
