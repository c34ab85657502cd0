//! Legacy VTK ASCII writers and the merged plain-text solution dump.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::mesh::Mesh;
use crate::partition::{coord_key, CoordKey};
use crate::space::FeSpace;

const VTK_QUAD: u8 = 9;

fn write_quads(
    out: &mut impl Write,
    title: &str,
    points: &[[f64; 2]],
    quads: &[[usize; 4]],
) -> std::io::Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", points.len())?;
    for p in points {
        writeln!(out, "{:.16e} {:.16e} 0", p[0], p[1])?;
    }
    writeln!(out, "CELLS {} {}", quads.len(), 5 * quads.len())?;
    for q in quads {
        writeln!(out, "4 {} {} {} {}", q[0], q[1], q[2], q[3])?;
    }
    writeln!(out, "CELL_TYPES {}", quads.len())?;
    for _ in quads {
        writeln!(out, "{VTK_QUAD}")?;
    }
    Ok(())
}

pub fn write_mesh_vtk(path: &Path, mesh: &Mesh) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let points: Vec<[f64; 2]> = mesh.vertices().iter().map(|v| v.coords).collect();
    let quads: Vec<[usize; 4]> = mesh.cells().iter().map(|c| c.vertex_ids).collect();
    write_quads(&mut f, &format!("mesh level {}", mesh.level()), &points, &quads)?;
    f.flush()?;
    Ok(())
}

/// Own cells of one rank with the solution at cell vertices as point data.
/// `values` must be correct on all d.o.f.s of own cells (L1).
pub fn write_solution_vtk(path: &Path, space: &FeSpace, values: &[f64]) -> Result<()> {
    let mesh = space.mesh();
    let element = space.element();
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut points = Vec::new();
    let mut data = Vec::new();
    let mut quads = Vec::with_capacity(space.rank_cells().own.len());
    for &cell in &space.rank_cells().own {
        let dofs = space.dof_map().cell_dofs(cell).expect("own cell is known");
        let vids = mesh.cells()[cell].vertex_ids;
        let mut q = [0; 4];
        for k in 0..4 {
            q[k] = *index.entry(vids[k]).or_insert_with(|| {
                points.push(mesh.vertices()[vids[k]].coords);
                data.push(values[dofs[element.vertex_dof(k)]]);
                points.len() - 1
            });
        }
        quads.push(q);
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_quads(&mut f, &format!("rank {} solution", space.comm().rank()), &points, &quads)?;
    writeln!(f, "POINT_DATA {}", points.len())?;
    writeln!(f, "SCALARS u double 1")?;
    writeln!(f, "LOOKUP_TABLE default")?;
    for v in data {
        writeln!(f, "{v:.16e}")?;
    }
    f.flush()?;
    Ok(())
}

/// `(position, value)` of every master on this rank.
pub fn master_values(space: &FeSpace, values: &[f64]) -> Vec<([f64; 2], f64)> {
    space
        .classification()
        .masters()
        .map(|d| (space.coords()[d], values[d]))
        .collect()
}

/// Merges per-rank master values into one map keyed by position.
pub fn merge_masters(parts: impl IntoIterator<Item = Vec<([f64; 2], f64)>>) -> BTreeMap<CoordKey, ([f64; 2], f64)> {
    let mut out = BTreeMap::new();
    for part in parts {
        for (x, v) in part {
            out.insert(coord_key(x), (x, v));
        }
    }
    out
}

/// Plain text, one d.o.f. per line: `x y value`, sorted by position.
pub fn write_merged(path: &Path, merged: &BTreeMap<CoordKey, ([f64; 2], f64)>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# x y value")?;
    for (x, v) in merged.values() {
        writeln!(f, "{:.12e} {:.12e} {:.16e}", x[0], x[1], v)?;
    }
    f.flush()?;
    Ok(())
}
