use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown cell id {0}")]
    UnknownCell(usize),

    #[error("degenerate cell {cell}: non-positive Jacobian determinant {det:e}")]
    DegenerateCell { cell: usize, det: f64 },

    #[error("singular Jacobian (determinant {0:e})")]
    SingularJacobian(f64),

    #[error("unsupported quadrature order {0} (supported: 1..=5 points per direction)")]
    UnsupportedQuadrature(usize),

    #[error("inconsistent element kinds across cells: a space carries exactly one element type")]
    MixedElements,

    #[error("d.o.f. coordinates disagree between cells by {0:e} (wiring bug)")]
    DofCoordinateMismatch(f64),

    #[error("d.o.f. {0} is not contained in any known cell")]
    DofWithoutCell(usize),

    #[error("slave d.o.f. {dof} on rank {rank} has no master on any rank")]
    UnmatchedSlave { rank: usize, dof: usize },

    #[error("zero diagonal entry in row {0}")]
    ZeroDiagonal(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("coarse system is singular")]
    SingularCoarse,

    #[error("level {level} out of range (hierarchy has {n_levels} levels)")]
    LevelOutOfRange { level: usize, n_levels: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
