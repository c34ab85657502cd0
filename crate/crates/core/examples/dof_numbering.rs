//! Local-to-global d.o.f. maps on a 2x2 mesh and on a Hemker mesh.

use parfem::dof_manager::build_dof_map;
use parfem::mapped_fe::ElementKind;
use parfem::mesh::{build_hemker_mesh, build_rect_mesh};

fn main() -> parfem::Result<()> {
    let mesh = build_rect_mesh(0.0, 1.0, 0.0, 1.0, 2, 2)?;
    let cells: Vec<usize> = (0..4).collect();
    for kind in [ElementKind::Q1, ElementKind::Q2] {
        let map = build_dof_map(&mesh, &cells, kind)?;
        println!("2x2 mesh, {kind:?}: {} global d.o.f.s", map.n_dofs());
        for (cell, name) in cells.iter().zip(["A", "B", "C", "D"]) {
            println!("  F({name}, .) = {:?}", map.cell_dofs(*cell).unwrap());
        }
    }

    let hemker = build_hemker_mesh();
    let all: Vec<usize> = (0..hemker.n_cells()).collect();
    for kind in [ElementKind::Q1, ElementKind::Q2] {
        let map = build_dof_map(&hemker, &all, kind)?;
        println!("Hemker coarse mesh, {kind:?}: {} global d.o.f.s", map.n_dofs());
    }
    Ok(())
}
