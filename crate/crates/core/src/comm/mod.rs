//! Simulated SPMD transport and the master/slave update protocol.

mod mapper;
mod transport;

pub use mapper::{build_fe_mapper, ConsistencyLevel, FeMapper, Relation, Schedule};
pub use transport::{Comm, TraceEntry, Universe};
