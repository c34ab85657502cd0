//! Partitions a refined Hemker mesh onto several ranks and prints the cell
//! and d.o.f. classes each rank sees.

use std::sync::Arc;

use parfem::comm::Universe;
use parfem::mapped_fe::ElementKind;
use parfem::mesh::build_hemker_mesh;
use parfem::partition::{decompose, DofClass};
use parfem::space::FeSpace;

const CLASSES: [DofClass; 7] = [
    DofClass::Independent,
    DofClass::DependentAlpha,
    DofClass::DependentBeta,
    DofClass::InterfaceMaster,
    DofClass::InterfaceSlave,
    DofClass::HaloAlpha,
    DofClass::HaloBeta,
];

fn main() {
    let n_ranks = 4;
    let mesh = Arc::new(build_hemker_mesh().refine_uniform());
    let lines = Universe::new(n_ranks).run(|comm| {
        let own = decompose(&mesh, n_ranks).expect("enough cells");
        let space = FeSpace::new(&comm, Arc::clone(&mesh), own, ElementKind::Q2).expect("space");
        let rc = space.rank_cells();
        let cls = space.classification();
        let counts: Vec<String> = CLASSES.iter().map(|&c| format!("{:?}={}", c, cls.count(c))).collect();
        format!(
            "rank {}: own {} (dependent {}, independent {}), halo {}\n  {}",
            comm.rank(),
            rc.own.len(),
            rc.dependent.len(),
            rc.independent.len(),
            rc.halo.len(),
            counts.join(" ")
        )
    });
    for l in lines {
        println!("{l}");
    }
}
