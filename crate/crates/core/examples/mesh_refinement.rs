//! Builds the Hemker coarse mesh, refines it uniformly and writes each level
//! as legacy VTK.

use std::path::PathBuf;

use parfem::mesh::build_hemker_mesh;
use parfem::vtk::write_mesh_vtk;

fn main() -> parfem::Result<()> {
    let dir = PathBuf::from("out/mesh_refinement");
    std::fs::create_dir_all(&dir)?;
    let mut mesh = build_hemker_mesh();
    for level in 0..=3 {
        let h_min = (0..mesh.n_cells()).map(|c| mesh.diameter(c)).fold(f64::INFINITY, f64::min);
        println!(
            "level {level}: {:6} cells {:6} vertices {:6} edges  min diameter {h_min:.4}",
            mesh.n_cells(),
            mesh.n_vertices(),
            mesh.n_edges()
        );
        write_mesh_vtk(&dir.join(format!("hemker_level{level}.vtk")), &mesh)?;
        if level < 3 {
            mesh = mesh.refine_uniform();
        }
    }
    println!("wrote {}", dir.display());
    Ok(())
}
