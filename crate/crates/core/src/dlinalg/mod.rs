//! Distributed vectors and matrices with consistency tags, the block-Jacobi
//! SSOR smoother, and restarted FGMRES.

mod fgmres;
mod matrix;
mod smoother;
mod vector;

pub use fgmres::{
    fgmres, write_history_csv, FgmresOptions, IdentityPreconditioner, IterationRecord, JacobiPreconditioner,
    Preconditioner, SolveResult, SsorPreconditioner,
};
pub use matrix::DistMatrix;
pub use smoother::BlockSsor;
pub use vector::DistVector;
