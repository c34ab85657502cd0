//! Assembly of convection-diffusion-reaction operators with optional SUPG
//! stabilization, mass matrices, Dirichlet rows and Crank-Nicolson systems.

use std::sync::Arc;

use crate::comm::ConsistencyLevel;
use crate::dlinalg::{DistMatrix, DistVector};
use crate::error::{Error, Result};
use crate::mapped_fe::{gauss_rule, make_reference_map, physical_gradients, physical_laplacians, ElementKind, QuadratureRule};
use crate::space::FeSpace;

pub type ScalarFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

/// Coefficients of `-eps Δu + b·∇u + c u = f`.
#[derive(Clone)]
pub struct CdrCoefficients {
    pub eps: f64,
    pub convection: VectorFn,
    pub reaction: ScalarFn,
    pub source: ScalarFn,
    pub supg: bool,
}

impl std::fmt::Debug for CdrCoefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CdrCoefficients")
            .field("eps", &self.eps)
            .field("supg", &self.supg)
            .finish_non_exhaustive()
    }
}

impl CdrCoefficients {
    /// `-eps Δu + b·∇u + c u = f` with constant `eps`, `b`, `c` and source `f`.
    pub fn constant(eps: f64, b: [f64; 2], c: f64, f: ScalarFn) -> CdrCoefficients {
        CdrCoefficients {
            eps,
            convection: Arc::new(move |_| b),
            reaction: Arc::new(move |_| c),
            source: f,
            supg: false,
        }
    }

    /// `-Δu = f`.
    pub fn poisson(f: ScalarFn) -> CdrCoefficients {
        CdrCoefficients::constant(1.0, [0.0, 0.0], 0.0, f)
    }

    pub fn with_supg(mut self, on: bool) -> CdrCoefficients {
        self.supg = on;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.eps > 0.0 && self.eps.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("diffusion must be positive, got {}", self.eps)))
        }
    }
}

/// Streamline diffusion parameter
/// `tau = h / (2|b|) (coth(Pe) - 1/Pe)`, `Pe = |b| h / (2 eps)`.
pub fn supg_tau(h: f64, b_norm: f64, eps: f64) -> f64 {
    if b_norm == 0.0 {
        return 0.0;
    }
    let pe = b_norm * h / (2.0 * eps);
    let xi = if pe < 1e-3 {
        pe / 3.0 - pe.powi(3) / 45.0
    } else {
        1.0 / pe.tanh() - 1.0 / pe
    };
    h / (2.0 * b_norm) * xi
}

pub fn quadrature_for(kind: ElementKind) -> Result<QuadratureRule> {
    match kind {
        ElementKind::Q1 => gauss_rule(2),
        ElementKind::Q2 => gauss_rule(3),
    }
}

/// Convection field given as two finite element functions.
pub struct Wind<'a> {
    pub bx: &'a mut DistVector,
    pub by: &'a mut DistVector,
}

enum Flow<'a> {
    Analytic(&'a VectorFn),
    Discrete(&'a [f64], &'a [f64]),
}

impl Flow<'_> {
    fn at(&self, x: [f64; 2], dofs: &[usize], phi: &[f64]) -> [f64; 2] {
        match self {
            Flow::Analytic(f) => f(x),
            Flow::Discrete(bx, by) => {
                let mut b = [0.0; 2];
                for (&d, &p) in dofs.iter().zip(phi) {
                    b[0] += bx[d] * p;
                    b[1] += by[d] * p;
                }
                b
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Form {
    Operator,
    Mass,
}

fn assemble(space: &Arc<FeSpace>, coeffs: &CdrCoefficients, flow: Flow<'_>, form: Form) -> Result<(DistMatrix, DistVector)> {
    coeffs.validate()?;
    let mesh = space.mesh();
    let dof_map = space.dof_map();
    let element = space.element();
    let nl = element.n_dofs();
    let quad = quadrature_for(space.kind())?;
    let basis: Vec<_> = quad.points.iter().map(|&xi| element.eval(xi)).collect();
    let center_phi = element.values([0.0, 0.0]);
    let mut matrix = DistMatrix::zeros(space);
    let mut rhs = DistVector::zeros(space);
    let mut local = vec![0.0; nl * nl];
    let mut local_rhs = vec![0.0; nl];
    for (pos, &cell) in dof_map.cells().iter().enumerate() {
        let map = make_reference_map(mesh, cell)?;
        let dofs = dof_map.cell_dofs_at(pos);
        let tau = if coeffs.supg {
            let b = flow.at(map.eval([0.0, 0.0]), dofs, &center_phi);
            supg_tau(mesh.diameter(cell), b[0].hypot(b[1]), coeffs.eps)
        } else {
            0.0
        };
        local.fill(0.0);
        local_rhs.fill(0.0);
        for (q, (&xi, &w)) in quad.points.iter().zip(&quad.weights).enumerate() {
            let be = &basis[q];
            let x = map.eval(xi);
            let jw = w * map.det(xi);
            let grads = physical_gradients(&map, xi, &be.grads)?;
            let b = flow.at(x, dofs, &be.values);
            let streamline: Vec<f64> = grads.iter().map(|g| b[0] * g[0] + b[1] * g[1]).collect();
            let test: Vec<f64> = (0..nl).map(|a| be.values[a] + tau * streamline[a]).collect();
            match form {
                Form::Mass => {
                    for a in 0..nl {
                        for bb in 0..nl {
                            local[a * nl + bb] += jw * be.values[bb] * test[a];
                        }
                    }
                }
                Form::Operator => {
                    let c = (coeffs.reaction)(x);
                    let f = (coeffs.source)(x);
                    let laps = if tau > 0.0 {
                        physical_laplacians(&map, xi, &grads, &be.hessians)?
                    } else {
                        vec![0.0; nl]
                    };
                    for a in 0..nl {
                        for bb in 0..nl {
                            let galerkin = coeffs.eps * (grads[bb][0] * grads[a][0] + grads[bb][1] * grads[a][1])
                                + (streamline[bb] + c * be.values[bb]) * be.values[a];
                            let stab = tau
                                * (-coeffs.eps * laps[bb] + streamline[bb] + c * be.values[bb])
                                * streamline[a];
                            local[a * nl + bb] += jw * (galerkin + stab);
                        }
                        local_rhs[a] += jw * f * test[a];
                    }
                }
            }
        }
        matrix.add_cell_matrix(pos, &local);
        let r = rhs.values_mut();
        for (a, &d) in dofs.iter().enumerate() {
            r[d] += local_rhs[a];
        }
    }
    rhs.set_level(ConsistencyLevel::L1);
    Ok((matrix, rhs))
}

/// Galerkin (plus SUPG if enabled) operator and right-hand side, assembled
/// on every known cell. A discrete `wind` replaces the analytic convection
/// and is raised to L3 first. Collective only through that restore.
pub fn assemble_cdr(
    space: &Arc<FeSpace>,
    coeffs: &CdrCoefficients,
    wind: Option<Wind<'_>>,
) -> Result<(DistMatrix, DistVector)> {
    match wind {
        None => assemble(space, coeffs, Flow::Analytic(&coeffs.convection), Form::Operator),
        Some(w) => {
            w.bx.restore(ConsistencyLevel::L3);
            w.by.restore(ConsistencyLevel::L3);
            assemble(space, coeffs, Flow::Discrete(w.bx.values(), w.by.values()), Form::Operator)
        }
    }
}

/// Mass matrix; with SUPG on, the test functions carry the streamline term.
pub fn assemble_mass(space: &Arc<FeSpace>, coeffs: &CdrCoefficients) -> Result<DistMatrix> {
    Ok(assemble(space, coeffs, Flow::Analytic(&coeffs.convection), Form::Mass)?.0)
}

/// Boundary d.o.f.s selected by `predicate` on their coordinates.
pub fn dirichlet_mask(space: &FeSpace, predicate: impl Fn([f64; 2]) -> bool) -> Vec<bool> {
    space
        .coords()
        .iter()
        .zip(space.on_boundary())
        .map(|(&x, &b)| b && predicate(x))
        .collect()
}

/// Identity rows for masked d.o.f.s and boundary values in the right-hand
/// side. Every rank applies it to every known d.o.f., so interface rows stay
/// consistent.
pub fn apply_dirichlet(
    matrix: Option<&mut DistMatrix>,
    rhs: Option<&mut DistVector>,
    mask: &[bool],
    value: impl Fn([f64; 2]) -> f64,
) {
    if let Some(m) = matrix {
        for (i, &on) in mask.iter().enumerate() {
            if on {
                m.set_identity_row(i);
            }
        }
    }
    if let Some(r) = rhs {
        let coords = r.space().coords().to_vec();
        let v = r.values_mut();
        for (i, &on) in mask.iter().enumerate() {
            if on {
                v[i] = value(coords[i]);
            }
        }
    }
}

/// Crank-Nicolson matrices for `M u' + A u = f`: the implicit system
/// `M + dt/2 A` (Dirichlet rows replaced) and the explicit `M - dt/2 A`.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    pub dt: f64,
    pub system: DistMatrix,
    pub explicit: DistMatrix,
    pub mask: Vec<bool>,
}

impl CrankNicolson {
    pub fn new(m: &DistMatrix, a: &DistMatrix, dt: f64, mask: Vec<bool>) -> Result<CrankNicolson> {
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        let mut system = m.clone();
        system.add_scaled(0.5 * dt, a)?;
        let mut explicit = m.clone();
        explicit.add_scaled(-0.5 * dt, a)?;
        apply_dirichlet(Some(&mut system), None, &mask, |_| 0.0);
        Ok(CrankNicolson {
            dt,
            system,
            explicit,
            mask,
        })
    }

    /// Right-hand side `(M - dt/2 A) u_n + dt/2 (f_n + f_{n+1})` with the
    /// boundary values `g` at the new time. Collective.
    pub fn rhs(
        &self,
        u_n: &mut DistVector,
        f_n: &DistVector,
        f_np1: &DistVector,
        g: impl Fn([f64; 2]) -> f64,
    ) -> Result<DistVector> {
        let mut r = self.explicit.matvec(u_n)?;
        r.axpy(0.5 * self.dt, f_n)?;
        r.axpy(0.5 * self.dt, f_np1)?;
        apply_dirichlet(None, Some(&mut r), &self.mask, g);
        Ok(r)
    }
}

/// Assembles one Crank-Nicolson step: returns the system matrix, its
/// right-hand side and the initial guess `u_n`.
pub fn crank_nicolson_step(
    m: &DistMatrix,
    a: &DistMatrix,
    f_n: &DistVector,
    f_np1: &DistVector,
    u_n: &DistVector,
    dt: f64,
    mask: &[bool],
    g: impl Fn([f64; 2]) -> f64,
) -> Result<(DistMatrix, DistVector, DistVector)> {
    let cn = CrankNicolson::new(m, a, dt, mask.to_vec())?;
    let mut guess = u_n.clone();
    let rhs = cn.rhs(&mut guess, f_n, f_np1, g)?;
    Ok((cn.system, rhs, guess))
}

/// `(∫ (u_h - u)^2)^{1/2}` over the domain, integrated on own cells with a
/// 5-point Gauss rule. `u_h` is raised to L1 first. Collective.
pub fn l2_error(u_h: &mut DistVector, exact: impl Fn([f64; 2]) -> f64) -> Result<f64> {
    u_h.restore(ConsistencyLevel::L1);
    let space = Arc::clone(u_h.space());
    let mesh = space.mesh();
    let element = space.element();
    let quad = gauss_rule(5)?;
    let phis: Vec<Vec<f64>> = quad.points.iter().map(|&xi| element.values(xi)).collect();
    let values = u_h.values();
    let mut local = 0.0;
    for &cell in &space.rank_cells().own {
        let map = make_reference_map(mesh, cell)?;
        let dofs = space.dof_map().cell_dofs(cell).expect("own cell is known");
        for (q, (&xi, &w)) in quad.points.iter().zip(&quad.weights).enumerate() {
            let uh: f64 = dofs.iter().zip(&phis[q]).map(|(&d, p)| values[d] * p).sum();
            let e = uh - exact(map.eval(xi));
            local += w * map.det(xi) * e * e;
        }
    }
    Ok(space.comm().allreduce_sum(local).sqrt())
}

/// L2 norm of the finite element function `u_h - v_h`. Collective.
pub fn l2_distance(u_h: &DistVector, v_h: &DistVector) -> Result<f64> {
    let mut diff = u_h.clone();
    diff.axpy(-1.0, v_h)?;
    diff.set_level(u_h.level().min(v_h.level()));
    l2_error(&mut diff, |_| 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::Universe;
    use crate::mesh::build_rect_mesh;
    use crate::partition::CellOwnership;

    fn one_cell_space(c: &crate::comm::Comm, kind: ElementKind) -> Arc<FeSpace> {
        let mesh = Arc::new(build_rect_mesh(0.0, 1.0, 0.0, 1.0, 1, 1).unwrap());
        FeSpace::new(c, mesh, CellOwnership::new(vec![0], 1).unwrap(), kind).unwrap()
    }

    #[test]
    fn laplace_element_matrix_unit_square() {
        Universe::new(1).run(|c| {
            let s = one_cell_space(&c, ElementKind::Q1);
            let coeffs = CdrCoefficients::poisson(Arc::new(|_| 1.0));
            let (a, f) = assemble_cdr(&s, &coeffs, None).unwrap();
            // classical bilinear stiffness: 2/3 diagonal, -1/6 along edges, -1/3 across
            let dofs = s.dof_map().cell_dofs(0).unwrap().to_vec();
            let pos = |k: usize| s.coords()[dofs[k]];
            for i in 0..4 {
                for j in 0..4 {
                    let (pi, pj) = (pos(i), pos(j));
                    let dist = ((pi[0] - pj[0]).abs() + (pi[1] - pj[1]).abs()).round() as usize;
                    let expect = [2.0 / 3.0, -1.0 / 6.0, -1.0 / 3.0][dist];
                    assert!((a.get(dofs[i], dofs[j]) - expect).abs() < 1e-14);
                }
                assert!((f.values()[dofs[i]] - 0.25).abs() < 1e-14);
            }
        });
    }

    #[test]
    fn reaction_rows_match_mass_rows() {
        Universe::new(1).run(|c| {
            let s = one_cell_space(&c, ElementKind::Q2);
            let coeffs = CdrCoefficients::constant(1e-300, [0.0, 0.0], 1.0, Arc::new(|_| 0.0));
            let (a, _) = assemble_cdr(&s, &coeffs, None).unwrap();
            let m = assemble_mass(&s, &coeffs).unwrap();
            for i in 0..s.n_dofs() {
                let ra: f64 = a.row(i).map(|(_, v)| v).sum();
                let rm: f64 = m.row(i).map(|(_, v)| v).sum();
                assert!((ra - rm).abs() < 1e-14);
            }
        });
    }

    #[test]
    fn tau_limits() {
        assert_eq!(supg_tau(0.1, 0.0, 1e-6), 0.0);
        // convection dominated: tau -> h / (2|b|)
        assert!((supg_tau(0.1, 1.0, 1e-9) - 0.05).abs() < 1e-8);
        // diffusion dominated: tau ~ h^2 / (12 eps)
        let t = supg_tau(0.1, 1e-6, 1.0);
        assert!((t - 0.01 / 12.0).abs() < 1e-12);
        // series and closed form agree near the switch
        let pe_lo = supg_tau(2e-3 * 0.999, 1.0, 1.0);
        let pe_hi = supg_tau(2e-3 * 1.001, 1.0, 1.0);
        assert!((pe_hi - pe_lo).abs() < 1e-8);
    }

    #[test]
    fn crank_nicolson_test_equation() {
        Universe::new(1).run(|c| {
            let s = one_cell_space(&c, ElementKind::Q1);
            // M = mass, A = M gives u' = -u for every mode
            let coeffs = CdrCoefficients::constant(1.0, [0.0, 0.0], 0.0, Arc::new(|_| 0.0));
            let m = assemble_mass(&s, &coeffs).unwrap();
            let zero = DistVector::zeros(&s);
            let u0 = DistVector::interpolate(&s, |_| 1.0);
            let dt = 0.1;
            let (sys, rhs, _) =
                crank_nicolson_step(&m, &m, &zero, &zero, &u0, dt, &vec![false; s.n_dofs()], |_| 0.0).unwrap();
            // constant vector: (1 + dt/2) M u = (1 - dt/2) M 1
            let mut u = DistVector::interpolate(&s, |_| (1.0 - dt / 2.0) / (1.0 + dt / 2.0));
            let lhs = sys.matvec(&mut u).unwrap();
            for i in 0..s.n_dofs() {
                assert!((lhs.values()[i] - rhs.values()[i]).abs() < 1e-15);
            }
            assert!(CrankNicolson::new(&m, &m, 0.0, vec![]).is_err());
        });
    }
}
