//! Hierarchical quadrilateral meshes.
//!
//! Cells are stored by global id: `mesh.cells()[g].global_id == g` on every
//! level. Coarse generators number cells `0..n`, and uniform refinement gives
//! child `k` of cell `g` the id `4 * g + k`, so the numbering on a refined
//! level is a pure function of the coarse numbering. Every rank can therefore
//! refer to a cell by the same number without communication.
//!
//! Vertices of a cell are stored counterclockwise, starting at the vertex
//! that the reference map sends to `(-1, -1)`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub coords: [f64; 2],
    /// Vertex lies on the curved (circular) part of the boundary.
    pub on_circle: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub global_id: usize,
    pub vertex_ids: [usize; 4],
    pub parent_id: Option<usize>,
    pub child_ids: Option<[usize; 4]>,
    pub level: usize,
}

/// Circle that curved boundary vertices are projected onto during refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Circle {
    pub fn project(&self, p: [f64; 2]) -> [f64; 2] {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let r = dx.hypot(dy);
        [
            self.center[0] + self.radius * dx / r,
            self.center[1] + self.radius * dy / r,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Vertex>,
    cells: Vec<Cell>,
    level: usize,
    /// Sorted vertex pair -> incident cells (ascending id, at most two).
    edge_table: BTreeMap<(usize, usize), Vec<usize>>,
    /// Vertex -> incident cells (ascending id).
    vertex_cells: Vec<Vec<usize>>,
    circle: Option<Circle>,
}

/// Local edge `e` of a cell joins local vertices `e` and `(e + 1) % 4`.
pub const CELL_EDGES: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (3, 0)];

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds a mesh from raw vertices and counterclockwise cell connectivity.
    /// Cell `k` of `cell_vertices` gets global id `k`.
    pub fn from_cells(
        vertices: Vec<Vertex>,
        cell_vertices: Vec<[usize; 4]>,
        circle: Option<Circle>,
    ) -> Result<Mesh> {
        let cells = cell_vertices
            .into_iter()
            .enumerate()
            .map(|(g, vertex_ids)| Cell {
                global_id: g,
                vertex_ids,
                parent_id: None,
                child_ids: None,
                level: 0,
            })
            .collect();
        Mesh::assemble(vertices, cells, 0, circle)
    }

    fn assemble(
        vertices: Vec<Vertex>,
        cells: Vec<Cell>,
        level: usize,
        circle: Option<Circle>,
    ) -> Result<Mesh> {
        for v in &vertices {
            if !v.coords.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite vertex {:?}", v.coords)));
            }
        }
        let mut edge_table: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        let mut vertex_cells = vec![Vec::new(); vertices.len()];
        for (g, cell) in cells.iter().enumerate() {
            debug_assert_eq!(cell.global_id, g);
            for &v in &cell.vertex_ids {
                if v >= vertices.len() {
                    return Err(Error::InvalidInput(format!("cell {g} references vertex {v}")));
                }
                vertex_cells[v].push(g);
            }
            check_convex_ccw(&vertices, cell)?;
            for (a, b) in CELL_EDGES {
                let key = edge_key(cell.vertex_ids[a], cell.vertex_ids[b]);
                let incident = edge_table.entry(key).or_default();
                incident.push(g);
                if incident.len() > 2 {
                    return Err(Error::InvalidInput(format!(
                        "edge {key:?} shared by more than two cells"
                    )));
                }
            }
        }
        Ok(Mesh {
            vertices,
            cells,
            level,
            edge_table,
            vertex_cells,
            circle,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edge_table.len()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn circle(&self) -> Option<Circle> {
        self.circle
    }

    pub fn edge_table(&self) -> &BTreeMap<(usize, usize), Vec<usize>> {
        &self.edge_table
    }

    pub fn cell(&self, id: usize) -> Result<&Cell> {
        self.cells.get(id).ok_or(Error::UnknownCell(id))
    }

    pub fn vertex_cells(&self, vertex: usize) -> &[usize] {
        &self.vertex_cells[vertex]
    }

    /// Physical coordinates of the four vertices of a cell, counterclockwise.
    pub fn cell_coords(&self, id: usize) -> [[f64; 2]; 4] {
        let c = &self.cells[id];
        c.vertex_ids.map(|v| self.vertices[v].coords)
    }

    pub fn barycenter(&self, id: usize) -> [f64; 2] {
        let p = self.cell_coords(id);
        [
            0.25 * (p[0][0] + p[1][0] + p[2][0] + p[3][0]),
            0.25 * (p[0][1] + p[1][1] + p[2][1] + p[3][1]),
        ]
    }

    /// Largest distance between two vertices of the cell.
    pub fn diameter(&self, id: usize) -> f64 {
        let p = self.cell_coords(id);
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                d = d.max((p[i][0] - p[j][0]).hypot(p[i][1] - p[j][1]));
            }
        }
        d
    }

    /// Cells incident to the edge between two vertices.
    pub fn edge_cells(&self, a: usize, b: usize) -> &[usize] {
        self.edge_table
            .get(&edge_key(a, b))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn is_boundary_edge(&self, a: usize, b: usize) -> bool {
        self.edge_cells(a, b).len() == 1
    }

    /// All cells other than `id` sharing at least one vertex with it.
    pub fn neighbors_by_vertex(&self, id: usize) -> Result<BTreeSet<usize>> {
        let cell = self.cell(id)?;
        Ok(cell
            .vertex_ids
            .iter()
            .flat_map(|&v| self.vertex_cells[v].iter().copied())
            .filter(|&c| c != id)
            .collect())
    }

    /// Uniform refinement. Sets `child_ids` on `self` and returns the child mesh.
    pub fn refine_uniform(&mut self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut midpoints: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut cells = Vec::with_capacity(4 * self.cells.len());
        for parent in &mut self.cells {
            let v = parent.vertex_ids;
            let mut mids = [0usize; 4];
            for (e, (a, b)) in CELL_EDGES.into_iter().enumerate() {
                let key = edge_key(v[a], v[b]);
                mids[e] = *midpoints.entry(key).or_insert_with(|| {
                    let pa = self.vertices[v[a]];
                    let pb = self.vertices[v[b]];
                    let mut coords = [
                        0.5 * (pa.coords[0] + pb.coords[0]),
                        0.5 * (pa.coords[1] + pb.coords[1]),
                    ];
                    let curved = pa.on_circle
                        && pb.on_circle
                        && self.edge_table.get(&key).is_some_and(|c| c.len() == 1);
                    let on_circle = match (curved, self.circle) {
                        (true, Some(circle)) => {
                            coords = circle.project(coords);
                            true
                        }
                        _ => false,
                    };
                    vertices.push(Vertex { coords, on_circle });
                    vertices.len() - 1
                });
            }
            let p = v.map(|k| self.vertices[k].coords);
            vertices.push(Vertex {
                coords: [
                    0.25 * (p[0][0] + p[1][0] + p[2][0] + p[3][0]),
                    0.25 * (p[0][1] + p[1][1] + p[2][1] + p[3][1]),
                ],
                on_circle: false,
            });
            let center = vertices.len() - 1;
            let g = parent.global_id;
            let children = [
                [v[0], mids[0], center, mids[3]],
                [mids[0], v[1], mids[1], center],
                [center, mids[1], v[2], mids[2]],
                [mids[3], center, mids[2], v[3]],
            ];
            for (k, vertex_ids) in children.into_iter().enumerate() {
                cells.push(Cell {
                    global_id: 4 * g + k,
                    vertex_ids,
                    parent_id: Some(g),
                    child_ids: None,
                    level: parent.level + 1,
                });
            }
            parent.child_ids = Some([4 * g, 4 * g + 1, 4 * g + 2, 4 * g + 3]);
        }
        Mesh::assemble(vertices, cells, self.level + 1, self.circle)
            .expect("refinement of an admissible mesh is admissible")
    }
}

/// Reference-coordinate offset of child `k` inside its parent: the child's
/// reference point `xi` sits at `offset + xi / 2` in the parent.
pub const CHILD_OFFSETS: [[f64; 2]; 4] = [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]];

fn check_convex_ccw(vertices: &[Vertex], cell: &Cell) -> Result<()> {
    let p = cell.vertex_ids.map(|v| vertices[v].coords);
    let mut min_cross = f64::INFINITY;
    for k in 0..4 {
        let a = p[k];
        let b = p[(k + 1) % 4];
        let c = p[(k + 2) % 4];
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        min_cross = min_cross.min(cross);
    }
    if min_cross <= 0.0 {
        return Err(Error::DegenerateCell {
            cell: cell.global_id,
            det: min_cross,
        });
    }
    Ok(())
}

/// Refines `mesh` uniformly, linking parent and child cells both ways.
pub fn refine_uniform(mesh: &mut Mesh) -> Mesh {
    mesh.refine_uniform()
}

/// Tensor-product mesh of `[x0, x1] x [y0, y1]` with row-major cell ids.
pub fn build_rect_mesh(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Mesh> {
    if !(x0 < x1 && y0 < y1) {
        return Err(Error::InvalidInput(format!(
            "empty rectangle [{x0}, {x1}] x [{y0}, {y1}]"
        )));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput(format!("cell counts must be positive, got {nx} x {ny}")));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = y0 + (y1 - y0) * j as f64 / ny as f64;
        for i in 0..=nx {
            let x = x0 + (x1 - x0) * i as f64 / nx as f64;
            vertices.push(Vertex {
                coords: [x, y],
                on_circle: false,
            });
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Mesh::from_cells(vertices, cells, None)
}

/// Number of cells in the coarse Hemker layout.
pub const HEMKER_COARSE_CELLS: usize = 36;

/// Coarse mesh of `(-3, 9) x (-3, 3)` minus the closed unit disk.
///
/// A tensor block with spacing 1.5 covers everything outside the square
/// `[-1.5, 1.5]^2`; an O-grid ring of 8 cells joins that square to the
/// circle. Tensor cells get ids 0..28 (row-major), ring cells 28..36
/// (counterclockwise from angle 0).
pub fn build_hemker_mesh() -> Mesh {
    let xs: Vec<f64> = (0..=8).map(|i| -3.0 + 1.5 * i as f64).collect();
    let ys: Vec<f64> = (0..=4).map(|j| -3.0 + 1.5 * j as f64).collect();
    let inside_square = |x: f64, y: f64| x.abs() < 1.5 && y.abs() < 1.5;

    let mut vertices = Vec::new();
    let mut grid = vec![vec![usize::MAX; xs.len()]; ys.len()];
    for (j, &y) in ys.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            if !inside_square(x, y) {
                grid[j][i] = vertices.len();
                vertices.push(Vertex {
                    coords: [x, y],
                    on_circle: false,
                });
            }
        }
    }
    let mut cells = Vec::new();
    for j in 0..ys.len() - 1 {
        for i in 0..xs.len() - 1 {
            let cx = 0.5 * (xs[i] + xs[i + 1]);
            let cy = 0.5 * (ys[j] + ys[j + 1]);
            if inside_square(cx, cy) {
                continue;
            }
            cells.push([grid[j][i], grid[j][i + 1], grid[j + 1][i + 1], grid[j + 1][i]]);
        }
    }

    let circle = Circle {
        center: [0.0, 0.0],
        radius: 1.0,
    };
    let grid_at = |x: f64, y: f64| {
        let i = xs.iter().position(|&v| v == x).expect("square point on grid");
        let j = ys.iter().position(|&v| v == y).expect("square point on grid");
        grid[j][i]
    };
    let square = [
        (1.5, 0.0),
        (1.5, 1.5),
        (0.0, 1.5),
        (-1.5, 1.5),
        (-1.5, 0.0),
        (-1.5, -1.5),
        (0.0, -1.5),
        (1.5, -1.5),
    ]
    .map(|(x, y)| grid_at(x, y));
    let ring: Vec<usize> = (0..8)
        .map(|k| {
            let theta = std::f64::consts::FRAC_PI_4 * k as f64;
            vertices.push(Vertex {
                coords: circle.project([theta.cos(), theta.sin()]),
                on_circle: true,
            });
            vertices.len() - 1
        })
        .collect();
    for k in 0..8 {
        let n = (k + 1) % 8;
        cells.push([ring[k], square[k], square[n], ring[n]]);
    }
    Mesh::from_cells(vertices, cells, Some(circle)).expect("Hemker layout is admissible")
}
