//! Restores a distributed vector level by level and prints the traffic of
//! each update relation.

use std::sync::Arc;

use parfem::comm::{ConsistencyLevel, Universe};
use parfem::dlinalg::DistVector;
use parfem::mapped_fe::ElementKind;
use parfem::mesh::build_rect_mesh;
use parfem::partition::decompose;
use parfem::space::FeSpace;

fn main() {
    let n_ranks = 3;
    let mesh = Arc::new(build_rect_mesh(0.0, 3.0, 0.0, 1.0, 12, 4).expect("mesh"));
    let reports = Universe::new(n_ranks).run(|comm| {
        let own = decompose(&mesh, n_ranks).expect("partition");
        let space = FeSpace::new(&comm, Arc::clone(&mesh), own, ElementKind::Q1).expect("space");
        let mut v = DistVector::interpolate(&space, |x| x[0] + 2.0 * x[1]);
        v.set_level(ConsistencyLevel::L0);
        let mut lines = vec![format!("rank {}: {} local d.o.f.s", comm.rank(), space.n_dofs())];
        for target in [ConsistencyLevel::L1, ConsistencyLevel::L2, ConsistencyLevel::L3] {
            comm.clear_trace();
            v.restore(target);
            for e in comm.trace() {
                lines.push(format!("  -> {target:?}: {:<15} send_counts {:?}", e.label, e.send_counts));
            }
        }
        let y = v.dot(&v).expect("same space");
        lines.push(format!("  (v, v) = {y:.6}"));
        lines.join("\n")
    });
    for r in reports {
        println!("{r}");
    }
}
