use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use parfem::bench::{parse_element, report_table, run, RunConfig, SolverKind};
use parfem::problems::ProblemKind;

/// Runs one benchmark configuration on in-process logical ranks.
#[derive(Debug, Parser)]
#[command(name = "parfem-bench", version)]
struct Args {
    /// hemker2d | time-dependent-cube2d | poisson-mms
    #[arg(long, value_parser = |s: &str| s.parse::<ProblemKind>().map_err(|e| e.to_string()))]
    problem: ProblemKind,
    /// Q1 | Q2
    #[arg(long, default_value = "Q1")]
    element: String,
    /// Finest refinement level (defaults per problem)
    #[arg(long)]
    levels: Option<usize>,
    /// Rank counts; several values run a sweep
    #[arg(long, num_args = 1.., value_delimiter = ',', default_value = "1")]
    ranks: Vec<usize>,
    /// mg-fgmres | ssor-fgmres | coarse-direct
    #[arg(long, default_value = "mg-fgmres", value_parser = |s: &str| s.parse::<SolverKind>().map_err(|e| e.to_string()))]
    solver: SolverKind,
    #[arg(long, default_value_t = 2)]
    nu1: usize,
    #[arg(long, default_value_t = 2)]
    nu2: usize,
    /// SSOR relaxation (defaults per problem)
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long, default_value_t = 50)]
    restart: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    maxit: usize,
    #[arg(long, default_value_t = 1e-2)]
    dt: f64,
    #[arg(long = "t-end", default_value_t = 3.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Seed for a random initial guess
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "out-dir", default_value = "out")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let element = match parse_element(&args.element) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let mut reports = Vec::new();
    let mut all_converged = true;
    for &ranks in &args.ranks {
        let mut cfg = RunConfig::new(args.problem);
        cfg.element = element;
        if let Some(l) = args.levels {
            cfg.levels = l;
        }
        cfg.n_ranks = ranks;
        cfg.solver = args.solver;
        cfg.nu1 = args.nu1;
        cfg.nu2 = args.nu2;
        if let Some(w) = args.omega {
            cfg.omega = w;
        }
        cfg.restart = args.restart;
        cfg.tol = args.tol;
        cfg.maxit = args.maxit;
        cfg.dt = args.dt;
        cfg.t_end = args.t_end;
        cfg.repeats = args.repeats;
        cfg.seed = args.seed;
        cfg.out_dir = Some(if args.ranks.len() > 1 {
            args.out_dir.join(format!("ranks{ranks}"))
        } else {
            args.out_dir.clone()
        });
        match run(&cfg) {
            Ok(r) => {
                all_converged &= r.converged();
                reports.push(r);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
    }
    let (table, csv) = report_table(&reports);
    print!("{table}");
    if args.ranks.len() > 1 {
        if let Err(e) = std::fs::create_dir_all(&args.out_dir).and_then(|_| std::fs::write(args.out_dir.join("report.csv"), csv)) {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    if all_converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
