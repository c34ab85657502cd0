#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use parfem::comm::{Comm, Universe};
use parfem::mapped_fe::ElementKind;
use parfem::mesh::{build_hemker_mesh, build_rect_mesh, Mesh};
use parfem::partition::{coord_key, decompose, CoordKey};
use parfem::space::FeSpace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pseudo-random value in `[-1, 1)` attached to a position.
pub fn value_at(seed: u64, x: [f64; 2]) -> f64 {
    let (kx, ky) = coord_key(x);
    let mix = (kx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (ky as u64).rotate_left(31);
    ChaCha8Rng::seed_from_u64(seed ^ mix).gen_range(-1.0..1.0)
}

pub fn refined(mut mesh: Mesh, times: usize) -> Mesh {
    for _ in 0..times {
        mesh = mesh.refine_uniform();
    }
    mesh
}

/// A random rectangle or Hemker mesh with at least `min_cells` cells.
pub fn random_mesh(rng: &mut ChaCha8Rng, min_cells: usize) -> Mesh {
    let mut mesh = if rng.gen_bool(0.25) {
        build_hemker_mesh()
    } else {
        let nx = rng.gen_range(1..=5);
        let ny = rng.gen_range(1..=5);
        let x0 = rng.gen_range(-1.0..1.0);
        let y0 = rng.gen_range(-1.0..1.0);
        build_rect_mesh(x0, x0 + rng.gen_range(0.5..3.0), y0, y0 + rng.gen_range(0.5..3.0), nx, ny).unwrap()
    };
    let extra = rng.gen_range(0..=1);
    for _ in 0..extra {
        mesh = mesh.refine_uniform();
    }
    while mesh.n_cells() < min_cells {
        mesh = mesh.refine_uniform();
    }
    mesh
}

/// Runs `body` on `n_ranks` ranks, each with its part of an RCB-partitioned
/// finite element space on `mesh`.
pub fn on_ranks<T, F>(mesh: &Mesh, n_ranks: usize, kind: ElementKind, body: F) -> Vec<T>
where
    F: Fn(&Comm, Arc<FeSpace>) -> T + Sync,
    T: Send,
{
    let mesh = Arc::new(mesh.clone());
    Universe::new(n_ranks).run(|comm| {
        let ownership = decompose(&mesh, n_ranks).unwrap();
        let space = FeSpace::new(&comm, Arc::clone(&mesh), ownership, kind).unwrap();
        body(&comm, space)
    })
}

/// Values of a one-rank run keyed by d.o.f. position.
pub fn keyed(space: &FeSpace, values: &[f64]) -> BTreeMap<CoordKey, f64> {
    (0..space.n_dofs()).map(|d| (space.global_key(d), values[d])).collect()
}

/// Row-major dense copy of a one-rank matrix.
pub fn dense(a: &parfem::dlinalg::DistMatrix) -> Vec<Vec<f64>> {
    let n = a.n_rows();
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in a.row(i) {
            row[j] += v;
        }
    }
    m
}

/// Forward then backward SSOR sweeps over all rows in index order.
pub fn dense_ssor(a: &[Vec<f64>], x: &mut [f64], b: &[f64], omega: f64, sweeps: usize) {
    let n = b.len();
    let relax = |x: &mut [f64], i: usize| {
        let s: f64 = b[i] - (0..n).map(|j| a[i][j] * x[j]).sum::<f64>();
        x[i] += omega * s / a[i][i];
    };
    for _ in 0..sweeps {
        for i in 0..n {
            relax(x, i);
        }
        for i in (0..n).rev() {
            relax(x, i);
        }
    }
}

pub fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(v, y)| v * y).sum()).collect()
}

pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let x = m.lu().solve(&nalgebra::DVector::from_column_slice(b)).expect("nonsingular");
    x.iter().copied().collect()
}
