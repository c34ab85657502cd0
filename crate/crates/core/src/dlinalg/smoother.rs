use super::matrix::DistMatrix;
use super::vector::{same_space, DistVector};
use crate::comm::{ConsistencyLevel, Relation};
use crate::error::{Error, Result};

/// Block-Jacobi smoother with SSOR inside each rank's block of masters and
/// interface slaves. Halo values act as frozen data during a sweep; after
/// each sweep interface values are replaced by their average over all ranks
/// sharing them.
#[derive(Debug, Clone)]
pub struct BlockSsor {
    omega: f64,
    block: Vec<usize>,
    inv_diag: Vec<f64>,
}

impl BlockSsor {
    pub fn new(a: &DistMatrix, omega: f64) -> Result<BlockSsor> {
        if !(omega > 0.0 && omega < 2.0) {
            return Err(Error::InvalidInput(format!("SSOR relaxation {omega} outside (0, 2)")));
        }
        let cls = a.space().classification();
        let block: Vec<usize> = (0..a.n_rows())
            .filter(|&i| {
                let c = cls.class(i);
                c.is_master() || c.is_interface()
            })
            .collect();
        let mut inv_diag = vec![0.0; a.n_rows()];
        for &i in &block {
            let d = a.diagonal(i);
            if d == 0.0 {
                return Err(Error::ZeroDiagonal(i));
            }
            inv_diag[i] = 1.0 / d;
        }
        Ok(BlockSsor { omega, block, inv_diag })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    fn relax(&self, a: &DistMatrix, x: &mut [f64], b: &[f64], i: usize) {
        let mut s = b[i];
        for (j, v) in a.row(i) {
            s -= v * x[j];
        }
        x[i] += self.omega * s * self.inv_diag[i];
    }

    /// `sweeps` smoothing steps on `x`. `b` is raised to L1 internally.
    /// Output is L2. Collective.
    pub fn smooth(&self, a: &DistMatrix, x: &mut DistVector, b: &DistVector, sweeps: usize) -> Result<()> {
        same_space(a.space(), x.space())?;
        same_space(a.space(), b.space())?;
        let space = a.space().clone();
        let comm = space.comm();
        let mapper = space.mapper();
        let b_owned;
        let b = if b.level() < ConsistencyLevel::L1 {
            let mut c = b.clone();
            c.restore(ConsistencyLevel::L1);
            b_owned = c;
            &b_owned
        } else {
            b
        };
        let mult = mapper.interface_multiplicity();
        for _ in 0..sweeps {
            // interface-slave rows also couple with Halo(beta) entries
            x.restore(ConsistencyLevel::L3);
            let xv = x.values_mut();
            for &i in &self.block {
                self.relax(a, xv, b.values(), i);
            }
            for &i in self.block.iter().rev() {
                self.relax(a, xv, b.values(), i);
            }
            mapper.accumulate_interface(comm, xv);
            for &i in &self.block {
                if mult[i] > 1 {
                    xv[i] /= mult[i] as f64;
                }
            }
            mapper.update(comm, xv, Relation::Ims);
            mapper.update(comm, xv, Relation::DhAlpha);
            x.set_level(ConsistencyLevel::L2);
        }
        if sweeps == 0 {
            x.restore(ConsistencyLevel::L2);
        }
        Ok(())
    }
}
