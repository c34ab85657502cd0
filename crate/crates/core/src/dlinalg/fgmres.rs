use std::io::Write;
use std::path::Path;
use std::time::Instant;

use super::matrix::DistMatrix;
use super::smoother::BlockSsor;
use super::vector::DistVector;
use crate::comm::ConsistencyLevel;
use crate::error::Result;

/// Maps a residual (L0) to a correction (L2 or better).
pub trait Preconditioner {
    fn apply(&mut self, r: &DistVector) -> Result<DistVector>;

    fn name(&self) -> &str;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&mut self, r: &DistVector) -> Result<DistVector> {
        Ok(r.clone())
    }

    fn name(&self) -> &str {
        "identity"
    }
}

/// Diagonal scaling on masters.
#[derive(Debug, Clone)]
pub struct JacobiPreconditioner {
    inv_diag: Vec<f64>,
}

impl JacobiPreconditioner {
    pub fn new(a: &DistMatrix) -> Result<JacobiPreconditioner> {
        a.check_diagonal()?;
        let inv_diag = (0..a.n_rows())
            .map(|i| {
                let d = a.diagonal(i);
                if d == 0.0 {
                    0.0
                } else {
                    1.0 / d
                }
            })
            .collect();
        Ok(JacobiPreconditioner { inv_diag })
    }
}

impl Preconditioner for JacobiPreconditioner {
    fn apply(&mut self, r: &DistVector) -> Result<DistVector> {
        let mut z = r.clone();
        for (v, d) in z.values_mut().iter_mut().zip(&self.inv_diag) {
            *v *= d;
        }
        z.set_level(ConsistencyLevel::L0);
        Ok(z)
    }

    fn name(&self) -> &str {
        "jacobi"
    }
}

/// Block-Jacobi SSOR sweeps started from zero.
#[derive(Debug, Clone)]
pub struct SsorPreconditioner<'a> {
    matrix: &'a DistMatrix,
    smoother: BlockSsor,
    sweeps: usize,
}

impl<'a> SsorPreconditioner<'a> {
    pub fn new(matrix: &'a DistMatrix, omega: f64, sweeps: usize) -> Result<SsorPreconditioner<'a>> {
        Ok(SsorPreconditioner {
            smoother: BlockSsor::new(matrix, omega)?,
            matrix,
            sweeps,
        })
    }
}

impl Preconditioner for SsorPreconditioner<'_> {
    fn apply(&mut self, r: &DistVector) -> Result<DistVector> {
        let mut z = DistVector::zeros(r.space());
        self.smoother.smooth(self.matrix, &mut z, r, self.sweeps)?;
        Ok(z)
    }

    fn name(&self) -> &str {
        "ssor"
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgmresOptions {
    pub restart: usize,
    pub tol: f64,
    pub maxit: usize,
}

impl Default for FgmresOptions {
    fn default() -> Self {
        FgmresOptions {
            restart: 50,
            tol: 1e-10,
            maxit: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub residual: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub iterations: usize,
    pub converged: bool,
    pub initial_residual: f64,
    /// True residual norm of the returned iterate.
    pub final_residual: f64,
    /// Residual estimate after every inner iteration (iteration 0 is the
    /// initial residual).
    pub history: Vec<IterationRecord>,
    /// True residual norm at the start of every cycle and at the end.
    pub restart_residuals: Vec<f64>,
}

struct Givens {
    c: f64,
    s: f64,
}

impl Givens {
    fn new(a: f64, b: f64) -> Givens {
        if b == 0.0 {
            Givens { c: 1.0, s: 0.0 }
        } else {
            let r = a.hypot(b);
            Givens { c: a / r, s: b / r }
        }
    }

    fn apply(&self, a: f64, b: f64) -> (f64, f64) {
        (self.c * a + self.s * b, -self.s * a + self.c * b)
    }
}

/// Restarted flexible GMRES with modified Gram-Schmidt. Stops when the
/// Euclidean norm of the true residual drops below `tol`; the recurrence
/// estimate only triggers the check. `x` is updated in place and returned
/// at L3. Collective.
pub fn fgmres(
    a: &DistMatrix,
    pc: &mut dyn Preconditioner,
    b: &DistVector,
    x: &mut DistVector,
    opts: &FgmresOptions,
) -> Result<SolveResult> {
    let start = Instant::now();
    let m = opts.restart.max(1);
    let mut history = Vec::new();
    let mut restart_residuals = Vec::new();
    let mut r = a.residual(b, x)?;
    let mut beta = r.norm();
    let initial_residual = beta;
    history.push(IterationRecord {
        iteration: 0,
        residual: beta,
        seconds: 0.0,
    });
    restart_residuals.push(beta);
    let mut total = 0usize;
    let mut converged = beta < opts.tol;

    while !converged && total < opts.maxit {
        let mut v: Vec<DistVector> = Vec::with_capacity(m + 1);
        let mut z: Vec<DistVector> = Vec::with_capacity(m);
        r.scale(1.0 / beta);
        v.push(r);
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut rot: Vec<Givens> = Vec::with_capacity(m);
        let mut j = 0;
        while j < m && total < opts.maxit {
            let mut zj = pc.apply(&v[j])?;
            let mut w = a.matvec(&mut zj)?;
            for i in 0..=j {
                let hij = w.dot(&v[i])?;
                h[i][j] = hij;
                w.axpy(-hij, &v[i])?;
            }
            let hnext = w.norm();
            h[j + 1][j] = hnext;
            for (i, gv) in rot.iter().enumerate() {
                let (p, q) = gv.apply(h[i][j], h[i + 1][j]);
                h[i][j] = p;
                h[i + 1][j] = q;
            }
            let gv = Givens::new(h[j][j], h[j + 1][j]);
            let (p, _) = gv.apply(h[j][j], h[j + 1][j]);
            h[j][j] = p;
            h[j + 1][j] = 0.0;
            let (g0, g1) = gv.apply(g[j], 0.0);
            g[j] = g0;
            g[j + 1] = g1;
            rot.push(gv);
            z.push(zj);
            total += 1;
            j += 1;
            let estimate = g[j].abs();
            history.push(IterationRecord {
                iteration: total,
                residual: estimate,
                seconds: start.elapsed().as_secs_f64(),
            });
            if hnext == 0.0 || estimate < opts.tol {
                break;
            }
            w.scale(1.0 / hnext);
            v.push(w);
        }

        let mut y = vec![0.0; j];
        for i in (0..j).rev() {
            let mut s = g[i];
            for k in i + 1..j {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (yi, zi) in y.iter().zip(&z) {
            x.axpy(*yi, zi)?;
        }
        r = a.residual(b, x)?;
        beta = r.norm();
        restart_residuals.push(beta);
        converged = beta < opts.tol;
        if !beta.is_finite() {
            break;
        }
    }

    x.restore(ConsistencyLevel::L3);
    Ok(SolveResult {
        iterations: total,
        converged,
        initial_residual,
        final_residual: beta,
        history,
        restart_residuals,
    })
}

/// Writes `iteration,residual,seconds` lines with a header.
pub fn write_history_csv(path: &Path, history: &[IterationRecord]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "iteration,residual,seconds")?;
    for r in history {
        writeln!(f, "{},{:e},{:.6}", r.iteration, r.residual, r.seconds)?;
    }
    f.flush()?;
    Ok(())
}
