use std::sync::Arc;

use super::vector::{same_space, DistVector};
use crate::comm::ConsistencyLevel;
use crate::error::{Error, Result};
use crate::space::FeSpace;

/// Rank-local CSR matrix over all known d.o.f.s, on the sparsity pattern of
/// its space. Assembled on every known cell, so rows of masters and of
/// interface slaves are complete; halo rows may miss contributions.
#[derive(Debug, Clone)]
pub struct DistMatrix {
    space: Arc<FeSpace>,
    values: Vec<f64>,
}

impl DistMatrix {
    pub fn zeros(space: &Arc<FeSpace>) -> DistMatrix {
        DistMatrix {
            values: vec![0.0; space.pattern().nnz()],
            space: Arc::clone(space),
        }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn n_rows(&self) -> usize {
        self.space.n_dofs()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Adds a dense local matrix (row-major, local numbering) of the known
    /// cell at position `pos` of the d.o.f. map.
    pub fn add_cell_matrix(&mut self, pos: usize, local: &[f64]) {
        let slots = &self.space.pattern().cell_slots[pos];
        debug_assert_eq!(slots.len(), local.len());
        for (&s, &v) in slots.iter().zip(local) {
            self.values[s] += v;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let p = self.space.pattern();
        p.row(i).find(|&k| p.cols[k] == j).map_or(0.0, |k| self.values[k])
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.values[self.space.pattern().diag[i]]
    }

    /// Entries of row `i` as `(column, value)` in canonical order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let p = self.space.pattern();
        p.row(i).map(move |k| (p.cols[k], self.values[k]))
    }

    pub fn set_identity_row(&mut self, i: usize) {
        let p = self.space.pattern();
        for k in p.row(i) {
            self.values[k] = 0.0;
        }
        self.values[p.diag[i]] = 1.0;
    }

    /// `self <- self + a * other`.
    pub fn add_scaled(&mut self, a: f64, other: &DistMatrix) -> Result<()> {
        same_space(&self.space, &other.space)?;
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    /// `y = A x`. `x` is first raised to L2 if needed (collective). The
    /// result is L0, or L1 when `x` was L3.
    pub fn matvec(&self, x: &mut DistVector) -> Result<DistVector> {
        let mut y = DistVector::zeros(&self.space);
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &mut DistVector, y: &mut DistVector) -> Result<()> {
        same_space(&self.space, x.space())?;
        same_space(&self.space, y.space())?;
        if x.level() < ConsistencyLevel::L2 {
            log::debug!("matvec: restoring input from {:?} to L2", x.level());
            x.restore(ConsistencyLevel::L2);
        }
        let p = self.space.pattern();
        let xv = x.values();
        let out = y.values_mut();
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in p.row(i) {
                s += self.values[k] * xv[p.cols[k]];
            }
            *o = s;
        }
        let level = if x.level() == ConsistencyLevel::L3 {
            ConsistencyLevel::L1
        } else {
            ConsistencyLevel::L0
        };
        y.set_level(level);
        Ok(())
    }

    /// `b - A x`, tagged L0 (or L1 when `b` is at least L1 and `x` was L3).
    pub fn residual(&self, b: &DistVector, x: &mut DistVector) -> Result<DistVector> {
        let ax = self.matvec(x)?;
        let mut r = b.clone();
        r.axpy(-1.0, &ax)?;
        Ok(r)
    }

    /// Checks that every master and interface row has a nonzero diagonal.
    pub fn check_diagonal(&self) -> Result<()> {
        let cls = self.space.classification();
        for i in 0..self.n_rows() {
            let c = cls.class(i);
            if (c.is_master() || c.is_interface()) && self.diagonal(i) == 0.0 {
                return Err(Error::ZeroDiagonal(i));
            }
        }
        Ok(())
    }
}
