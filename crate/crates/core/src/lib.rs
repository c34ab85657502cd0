//! Parallel finite elements on quadrilateral meshes: mapped Q1/Q2 spaces,
//! distributed d.o.f. management over simulated ranks, consistency-aware
//! linear algebra, FGMRES and a parallel geometric multigrid preconditioner.

pub mod assembly;
pub mod bench;
pub mod comm;
pub mod dlinalg;
pub mod dof_manager;
pub mod error;
pub mod mapped_fe;
pub mod mesh;
pub mod multigrid;
pub mod partition;
pub mod problems;
pub mod space;
pub mod vtk;

pub use error::{Error, Result};
