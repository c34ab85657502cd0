//! Mapped finite elements on the reference square `[-1, 1]^2`.
//!
//! Basis functions, nodal functionals and quadrature live on the reference
//! cell only. A [`ReferenceMap`] transports them to a physical cell.

use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceCellKind {
    /// `[-1, 1]^2`.
    UnitQuad,
    /// Reference triangle `(0,0), (1,0), (0,1)`. No elements are defined on it.
    UnitSimplex,
}

impl ReferenceCellKind {
    pub fn measure(self) -> f64 {
        match self {
            ReferenceCellKind::UnitQuad => 4.0,
            ReferenceCellKind::UnitSimplex => 0.5,
        }
    }
}

/// Corners of the reference square in the counterclockwise vertex order.
pub const REF_VERTICES: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Affine,
    Bilinear,
}

/// `F(xi, eta) = a + b xi + c eta + d xi eta` for a quadrilateral.
/// For parallelograms `d` is exactly zero and the kind is `Affine`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceMap {
    pub kind: MapKind,
    a: [f64; 2],
    b: [f64; 2],
    c: [f64; 2],
    d: [f64; 2],
}

pub type Mat2 = [[f64; 2]; 2];

impl ReferenceMap {
    /// Map for the quadrilateral with counterclockwise vertices `p`.
    pub fn from_vertices(p: [[f64; 2]; 4]) -> ReferenceMap {
        let mut a = [0.0; 2];
        let mut b = [0.0; 2];
        let mut c = [0.0; 2];
        let mut d = [0.0; 2];
        for k in 0..2 {
            a[k] = 0.25 * (p[0][k] + p[1][k] + p[2][k] + p[3][k]);
            b[k] = 0.25 * (-p[0][k] + p[1][k] + p[2][k] - p[3][k]);
            c[k] = 0.25 * (-p[0][k] - p[1][k] + p[2][k] + p[3][k]);
            d[k] = 0.25 * (p[0][k] - p[1][k] + p[2][k] - p[3][k]);
        }
        let diam = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| (p[i][0] - p[j][0]).hypot(p[i][1] - p[j][1]))
            .fold(0.0, f64::max);
        // Parallelogram iff opposite edge vectors agree, i.e. d == 0.
        let kind = if d[0].hypot(d[1]) <= 1e-14 * diam {
            d = [0.0; 2];
            MapKind::Affine
        } else {
            MapKind::Bilinear
        };
        ReferenceMap { kind, a, b, c, d }
    }

    pub fn eval(&self, xi: [f64; 2]) -> [f64; 2] {
        let [s, t] = xi;
        [0, 1].map(|k| self.a[k] + self.b[k] * s + self.c[k] * t + self.d[k] * s * t)
    }

    /// `J[k][l] = dF_k / dxi_l`.
    pub fn jacobian(&self, xi: [f64; 2]) -> Mat2 {
        let [s, t] = xi;
        [
            [self.b[0] + self.d[0] * t, self.c[0] + self.d[0] * s],
            [self.b[1] + self.d[1] * t, self.c[1] + self.d[1] * s],
        ]
    }

    pub fn det(&self, xi: [f64; 2]) -> f64 {
        let j = self.jacobian(xi);
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }

    /// Mixed second derivative `d^2 F / dxi deta`; all other second
    /// derivatives of a bilinear map vanish.
    pub fn mixed_second_derivative(&self) -> [f64; 2] {
        self.d
    }

    /// Inverse Jacobian at `xi`.
    pub fn inverse_jacobian(&self, xi: [f64; 2]) -> Result<Mat2> {
        let j = self.jacobian(xi);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let scale = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if det.abs() <= 1e-14 * scale * scale || !det.is_finite() {
            return Err(Error::SingularJacobian(det));
        }
        Ok([[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]])
    }
}

/// Reference map of a mesh cell; rejects cells with non-positive Jacobian.
pub fn make_reference_map(mesh: &Mesh, cell: usize) -> Result<ReferenceMap> {
    mesh.cell(cell)?;
    let map = ReferenceMap::from_vertices(mesh.cell_coords(cell));
    for xi in REF_VERTICES {
        let det = map.det(xi);
        if det <= 0.0 {
            return Err(Error::DegenerateCell { cell, det });
        }
    }
    Ok(map)
}

/// `J^{-T} g` for each reference gradient `g`.
pub fn physical_gradients(map: &ReferenceMap, xi: [f64; 2], ref_grads: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    let jinv = map.inverse_jacobian(xi)?;
    Ok(ref_grads.iter().map(|g| apply_inverse_transpose(&jinv, *g)).collect())
}

fn apply_inverse_transpose(jinv: &Mat2, g: [f64; 2]) -> [f64; 2] {
    [
        jinv[0][0] * g[0] + jinv[1][0] * g[1],
        jinv[0][1] * g[0] + jinv[1][1] * g[1],
    ]
}

/// Physical Laplacians of basis functions from their reference Hessians.
///
/// With `g` the physical gradient, the physical Hessian is
/// `J^{-T} (H_ref - sum_k g_k H(F_k)) J^{-1}`; only the mixed entry of
/// `H(F_k)` is nonzero for a bilinear map.
pub fn physical_laplacians(
    map: &ReferenceMap,
    xi: [f64; 2],
    phys_grads: &[[f64; 2]],
    ref_hessians: &[Mat2],
) -> Result<Vec<f64>> {
    let jinv = map.inverse_jacobian(xi)?;
    let d = map.mixed_second_derivative();
    Ok(phys_grads
        .iter()
        .zip(ref_hessians)
        .map(|(g, h)| {
            let corr = g[0] * d[0] + g[1] * d[1];
            let m = [[h[0][0], h[0][1] - corr], [h[1][0] - corr, h[1][1]]];
            // trace(J^{-T} m J^{-1}) = sum_{a,b} m[a][b] (J^{-1} J^{-T})[b][a]
            let mut lap = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    let g_ba = jinv[b][0] * jinv[a][0] + jinv[b][1] * jinv[a][1];
                    lap += m[a][b] * g_ba;
                }
            }
            lap
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Q1,
    Q2,
}

/// Where the nodal functional of a local d.o.f. sits on the reference cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofLocation {
    /// At counterclockwise vertex `k`.
    Vertex(usize),
    /// Interior of local edge `edge` (see [`crate::mesh::CELL_EDGES`]); `pos`
    /// counts from the edge's start vertex.
    Edge { edge: usize, pos: usize },
    Interior,
}

/// Basis values, reference gradients and reference Hessians at one point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BasisEval {
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
    pub hessians: Vec<Mat2>,
}

/// Tensor-product Lagrange element with point-evaluation functionals.
///
/// Local d.o.f.s are numbered lexicographically: index `i + (p + 1) * j`
/// belongs to the node with 1D indices `(i, j)`, x fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalElement {
    pub kind: ElementKind,
}

impl LocalElement {
    pub fn new(kind: ElementKind) -> LocalElement {
        LocalElement { kind }
    }

    pub fn reference_cell(&self) -> ReferenceCellKind {
        ReferenceCellKind::UnitQuad
    }

    pub fn degree(&self) -> usize {
        match self.kind {
            ElementKind::Q1 => 1,
            ElementKind::Q2 => 2,
        }
    }

    pub fn n_dofs(&self) -> usize {
        let n = self.degree() + 1;
        n * n
    }

    fn nodes_1d(&self) -> &'static [f64] {
        match self.kind {
            ElementKind::Q1 => &[-1.0, 1.0],
            ElementKind::Q2 => &[-1.0, 0.0, 1.0],
        }
    }

    /// Reference coordinates of the point functional of local d.o.f. `i`.
    pub fn dof_node(&self, i: usize) -> [f64; 2] {
        let nodes = self.nodes_1d();
        let n = nodes.len();
        [nodes[i % n], nodes[i / n]]
    }

    pub fn dof_location(&self, i: usize) -> DofLocation {
        let p = self.degree();
        let (ix, iy) = (i % (p + 1), i / (p + 1));
        let (xb, yb) = (ix == 0 || ix == p, iy == 0 || iy == p);
        match (xb, yb) {
            (true, true) => DofLocation::Vertex(match (ix == 0, iy == 0) {
                (true, true) => 0,
                (false, true) => 1,
                (false, false) => 2,
                (true, false) => 3,
            }),
            (false, true) if iy == 0 => DofLocation::Edge { edge: 0, pos: ix - 1 },
            (false, true) => DofLocation::Edge { edge: 2, pos: p - 1 - ix },
            (true, false) if ix == p => DofLocation::Edge { edge: 1, pos: iy - 1 },
            (true, false) => DofLocation::Edge { edge: 3, pos: p - 1 - iy },
            (false, false) => DofLocation::Interior,
        }
    }

    /// Local index of the d.o.f. at counterclockwise vertex `k`.
    pub fn vertex_dof(&self, k: usize) -> usize {
        let p = self.degree();
        match k {
            0 => 0,
            1 => p,
            2 => (p + 1) * (p + 1) - 1,
            3 => p * (p + 1),
            _ => panic!("quadrilateral has four vertices"),
        }
    }

    /// Local indices of the interior d.o.f.s of edge `e`, from its start vertex.
    pub fn edge_dofs(&self, e: usize) -> Vec<usize> {
        let p = self.degree();
        let n = p + 1;
        (1..p)
            .map(|s| match e {
                0 => s,
                1 => p + n * s,
                2 => n * p + (p - s),
                3 => n * (p - s),
                _ => panic!("quadrilateral has four edges"),
            })
            .collect()
    }

    /// Values, reference gradients and reference Hessians at `xi`.
    pub fn eval(&self, xi: [f64; 2]) -> BasisEval {
        let nodes = self.nodes_1d();
        let n = nodes.len();
        let bx: Vec<[f64; 3]> = (0..n).map(|i| lagrange_1d(nodes, i, xi[0])).collect();
        let by: Vec<[f64; 3]> = (0..n).map(|i| lagrange_1d(nodes, i, xi[1])).collect();
        let mut out = BasisEval {
            values: Vec::with_capacity(n * n),
            grads: Vec::with_capacity(n * n),
            hessians: Vec::with_capacity(n * n),
        };
        for y in &by {
            for x in &bx {
                out.values.push(x[0] * y[0]);
                out.grads.push([x[1] * y[0], x[0] * y[1]]);
                out.hessians.push([[x[2] * y[0], x[1] * y[1]], [x[1] * y[1], x[0] * y[2]]]);
            }
        }
        out
    }

    /// Values only.
    pub fn values(&self, xi: [f64; 2]) -> Vec<f64> {
        self.eval(xi).values
    }
}

/// Value, first and second derivative of the `i`-th 1D Lagrange polynomial.
fn lagrange_1d(nodes: &[f64], i: usize, x: f64) -> [f64; 3] {
    let others: Vec<f64> = nodes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &v)| v)
        .collect();
    let denom: f64 = others.iter().map(|&v| nodes[i] - v).product();
    match others.as_slice() {
        [a] => [(x - a) / denom, 1.0 / denom, 0.0],
        [a, b] => [(x - a) * (x - b) / denom, (2.0 * x - a - b) / denom, 2.0 / denom],
        _ => unreachable!("only Q1 and Q2 nodes"),
    }
}

/// Tensor Gauss-Legendre rule on the reference square.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn gauss_1d(order: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let (p, w): (&[f64], &[f64]) = match order {
        1 => (&[0.0], &[2.0]),
        2 => (&[-0.577_350_269_189_625_8, 0.577_350_269_189_625_8], &[1.0, 1.0]),
        3 => (
            &[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
            &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0],
        ),
        4 => (
            &[
                -0.861_136_311_594_052_6,
                -0.339_981_043_584_856_3,
                0.339_981_043_584_856_3,
                0.861_136_311_594_052_6,
            ],
            &[
                0.347_854_845_137_453_85,
                0.652_145_154_862_546_1,
                0.652_145_154_862_546_1,
                0.347_854_845_137_453_85,
            ],
        ),
        5 => (
            &[
                -0.906_179_845_938_664,
                -0.538_469_310_105_683,
                0.0,
                0.538_469_310_105_683,
                0.906_179_845_938_664,
            ],
            &[
                0.236_926_885_056_189_08,
                0.478_628_670_499_366_47,
                0.568_888_888_888_888_9,
                0.478_628_670_499_366_47,
                0.236_926_885_056_189_08,
            ],
        ),
        _ => return None,
    };
    Some((p.to_vec(), w.to_vec()))
}

/// `order` points per direction, exact for degree `2 * order - 1` per direction.
pub fn gauss_rule(order: usize) -> Result<QuadratureRule> {
    let (p, w) = gauss_1d(order).ok_or(Error::UnsupportedQuadrature(order))?;
    let mut rule = QuadratureRule {
        points: Vec::with_capacity(order * order),
        weights: Vec::with_capacity(order * order),
    };
    for (py, wy) in p.iter().zip(&w) {
        for (px, wx) in p.iter().zip(&w) {
            rule.points.push([*px, *py]);
            rule.weights.push(wx * wy);
        }
    }
    Ok(rule)
}
