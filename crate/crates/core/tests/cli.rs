use std::path::PathBuf;
use std::process::Command;

fn out_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("parfem-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn bench() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_parfem-bench"));
    c.env("RUST_LOG", "warn");
    c
}

#[test]
fn rank_sweep_writes_all_outputs() {
    let dir = out_dir("sweep");
    let out = bench()
        .args(["--problem", "poisson-mms", "--levels", "2", "--ranks", "1,3", "--repeats", "3"])
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("poisson-mms") && table.contains("speedup"));
    let report = std::fs::read_to_string(dir.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 3);
    assert!(report.starts_with("problem,solver,element,level,ranks,iterations,time,speedup"));
    for r in [1, 3] {
        let sub = dir.join(format!("ranks{r}"));
        for f in ["report.csv", "residuals.csv", "solution_merged.txt"] {
            assert!(sub.join(f).is_file(), "{f} missing for {r} ranks");
        }
        for rank in 0..r {
            let vtk = std::fs::read_to_string(sub.join(format!("solution_rank{rank}.vtk"))).unwrap();
            assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
            assert!(vtk.contains("POINT_DATA"));
        }
    }
    let merged = std::fs::read_to_string(dir.join("ranks3/solution_merged.txt")).unwrap();
    // 16 x 16 Q1 mesh plus the header line
    assert_eq!(merged.lines().count(), 17 * 17 + 1);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn transient_run_logs_every_step() {
    let dir = out_dir("transient");
    let out = bench()
        .args(["--problem", "time-dependent-cube2d", "--levels", "2", "--dt", "0.05", "--t-end", "0.5"])
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let residuals = std::fs::read_to_string(dir.join("residuals.csv")).unwrap();
    let steps: std::collections::BTreeSet<&str> =
        residuals.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(steps.len(), 10);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn bad_arguments_fail() {
    let dir = out_dir("bad");
    let status = bench()
        .args(["--problem", "cube3d"])
        .arg("--out-dir")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(!status.success());
    let out = bench()
        .args(["--problem", "hemker2d", "--omega", "2.5"])
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("omega"));
}

#[test]
fn non_convergence_exits_with_code_two() {
    let dir = out_dir("maxit");
    let out = bench()
        .args(["--problem", "hemker2d", "--solver", "ssor-fgmres", "--maxit", "2"])
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}
