use std::sync::Arc;

use crate::comm::ConsistencyLevel;
use crate::error::{Error, Result};
use crate::space::FeSpace;

/// Rank-local values of a finite element vector, tagged with the
/// consistency level they are known to satisfy.
#[derive(Debug, Clone)]
pub struct DistVector {
    space: Arc<FeSpace>,
    values: Vec<f64>,
    level: ConsistencyLevel,
}

pub(crate) fn same_space(a: &Arc<FeSpace>, b: &Arc<FeSpace>) -> Result<()> {
    if Arc::ptr_eq(a, b) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch("vectors live on different spaces".into()))
    }
}

impl DistVector {
    /// Zero vector; trivially consistent everywhere.
    pub fn zeros(space: &Arc<FeSpace>) -> DistVector {
        DistVector {
            values: vec![0.0; space.n_dofs()],
            space: Arc::clone(space),
            level: ConsistencyLevel::L3,
        }
    }

    /// Nodal interpolant of `f`. Every rank evaluates `f` at the same
    /// points, so the result is consistent everywhere.
    pub fn interpolate(space: &Arc<FeSpace>, f: impl Fn([f64; 2]) -> f64) -> DistVector {
        DistVector {
            values: space.coords().iter().map(|&x| f(x)).collect(),
            space: Arc::clone(space),
            level: ConsistencyLevel::L3,
        }
    }

    pub fn from_values(space: &Arc<FeSpace>, values: Vec<f64>, level: ConsistencyLevel) -> Result<DistVector> {
        if values.len() != space.n_dofs() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} d.o.f.s",
                values.len(),
                space.n_dofs()
            )));
        }
        Ok(DistVector {
            space: Arc::clone(space),
            values,
            level,
        })
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Raw access; the caller is responsible for the tag.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn level(&self) -> ConsistencyLevel {
        self.level
    }

    pub fn set_level(&mut self, level: ConsistencyLevel) {
        self.level = level;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Brings the vector to at least `target`. Collective.
    pub fn restore(&mut self, target: ConsistencyLevel) {
        let space = Arc::clone(&self.space);
        self.level = space.mapper().restore(space.comm(), &mut self.values, self.level, target);
    }

    /// Euclidean inner product over masters. Collective; all ranks get the
    /// same value.
    pub fn dot(&self, other: &DistVector) -> Result<f64> {
        same_space(&self.space, &other.space)?;
        let cls = self.space.classification();
        let mut local = 0.0;
        for d in 0..self.values.len() {
            if cls.class(d).is_master() {
                local += self.values[d] * other.values[d];
            }
        }
        Ok(self.space.comm().allreduce_sum(local))
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).expect("same space").sqrt()
    }

    /// `self <- a * x + self`; the tag drops to the lower of the two.
    pub fn axpy(&mut self, a: f64, x: &DistVector) -> Result<()> {
        same_space(&self.space, &x.space)?;
        for (y, xv) in self.values.iter_mut().zip(&x.values) {
            *y += a * xv;
        }
        self.level = self.level.min(x.level);
        Ok(())
    }

    /// `self <- a * self + x`; the tag drops to the lower of the two.
    pub fn aypx(&mut self, a: f64, x: &DistVector) -> Result<()> {
        same_space(&self.space, &x.space)?;
        for (y, xv) in self.values.iter_mut().zip(&x.values) {
            *y = a * *y + xv;
        }
        self.level = self.level.min(x.level);
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    pub fn fill(&mut self, v: f64) {
        self.values.fill(v);
        self.level = ConsistencyLevel::L3;
    }

    pub fn copy_from(&mut self, other: &DistVector) -> Result<()> {
        same_space(&self.space, &other.space)?;
        self.values.copy_from_slice(&other.values);
        self.level = other.level;
        Ok(())
    }

    /// Largest absolute master value. Collective.
    pub fn max_abs(&self) -> f64 {
        let cls = self.space.classification();
        let local = (0..self.values.len())
            .filter(|&d| cls.class(d).is_master())
            .fold(0.0f64, |m, d| m.max(self.values[d].abs()));
        self.space.comm().allreduce_max(local)
    }
}
