//! The benchmark problems: the Hemker flow around a cylinder, a transient
//! plume on the unit square, and a manufactured Poisson problem.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::assembly::CdrCoefficients;
use crate::error::{Error, Result};
use crate::mesh::{build_hemker_mesh, build_rect_mesh, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemKind {
    Hemker2D,
    TimeDependentCube2D,
    PoissonMMS,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] = [ProblemKind::Hemker2D, ProblemKind::TimeDependentCube2D, ProblemKind::PoissonMMS];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Hemker2D => "hemker2d",
            ProblemKind::TimeDependentCube2D => "time-dependent-cube2d",
            ProblemKind::PoissonMMS => "poisson-mms",
        }
    }

    pub fn is_transient(self) -> bool {
        self == ProblemKind::TimeDependentCube2D
    }

    pub fn coarse_mesh(self) -> Result<Mesh> {
        match self {
            ProblemKind::Hemker2D => Ok(build_hemker_mesh()),
            ProblemKind::TimeDependentCube2D | ProblemKind::PoissonMMS => build_rect_mesh(0.0, 1.0, 0.0, 1.0, 4, 4),
        }
    }

    pub fn coefficients(self) -> CdrCoefficients {
        match self {
            ProblemKind::Hemker2D => hemker_coefficients(),
            ProblemKind::TimeDependentCube2D => plume_coefficients(),
            ProblemKind::PoissonMMS => CdrCoefficients::poisson(Arc::new(mms_source)),
        }
    }

    /// Boundary points carrying a Dirichlet condition.
    pub fn is_dirichlet(self, x: [f64; 2]) -> bool {
        match self {
            ProblemKind::Hemker2D => on_hemker_inlet(x) || on_cylinder(x),
            ProblemKind::TimeDependentCube2D => !on_plume_outlet(x),
            ProblemKind::PoissonMMS => true,
        }
    }

    /// Dirichlet value at time `t`.
    pub fn boundary_value(self, t: f64, x: [f64; 2]) -> f64 {
        match self {
            ProblemKind::Hemker2D => {
                if on_cylinder(x) {
                    1.0
                } else {
                    0.0
                }
            }
            ProblemKind::TimeDependentCube2D => {
                if on_plume_inlet(x) {
                    inflow_value(t)
                } else {
                    0.0
                }
            }
            ProblemKind::PoissonMMS => 0.0,
        }
    }

    pub fn exact_solution(self) -> Option<fn([f64; 2]) -> f64> {
        match self {
            ProblemKind::PoissonMMS => Some(mms_exact),
            _ => None,
        }
    }

    /// SSOR relaxation used for the problem by default.
    pub fn default_omega(self) -> f64 {
        match self {
            ProblemKind::TimeDependentCube2D => 1.25,
            _ => 1.0,
        }
    }

    pub fn default_levels(self) -> usize {
        match self {
            ProblemKind::Hemker2D => 2,
            ProblemKind::TimeDependentCube2D => 3,
            ProblemKind::PoissonMMS => 3,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_lowercase();
        match key.as_str() {
            "hemker2d" | "hemker" => Ok(ProblemKind::Hemker2D),
            "timedependentcube2d" | "timedependent" | "transient" => Ok(ProblemKind::TimeDependentCube2D),
            "poissonmms" | "poisson" => Ok(ProblemKind::PoissonMMS),
            _ => Err(Error::InvalidInput(format!("unknown problem '{s}'"))),
        }
    }
}

const TOL: f64 = 1e-9;

pub fn hemker_coefficients() -> CdrCoefficients {
    CdrCoefficients::constant(1e-6, [1.0, 0.0], 0.0, Arc::new(|_| 0.0)).with_supg(true)
}

fn on_hemker_inlet(x: [f64; 2]) -> bool {
    (x[0] + 3.0).abs() < TOL
}

fn on_cylinder(x: [f64; 2]) -> bool {
    x[0] * x[0] + x[1] * x[1] < 1.0 + TOL
}

/// `-Δu = f` for `u = sin(πx) sin(πy)`.
pub fn mms_source(x: [f64; 2]) -> f64 {
    2.0 * PI * PI * mms_exact(x)
}

pub fn mms_exact(x: [f64; 2]) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

/// Inflow profile of the transient problem: rises on `[0, 1]`, holds on
/// `(1, 2]`, then follows `sin(π(t-1)/2)` on `(2, 3]`.
pub fn inflow_value(t: f64) -> f64 {
    if t <= 1.0 {
        (PI * t / 2.0).sin()
    } else if t <= 2.0 {
        1.0
    } else {
        (PI * (t - 1.0) / 2.0).sin()
    }
}

pub const PLUME_INLET: (f64, f64) = (5.0 / 8.0, 6.0 / 8.0);
pub const PLUME_OUTLET: (f64, f64) = (3.0 / 8.0, 4.0 / 8.0);

/// Closed inlet segment on `x = 0`.
pub fn on_plume_inlet(x: [f64; 2]) -> bool {
    x[0].abs() < TOL && x[1] >= PLUME_INLET.0 - TOL && x[1] <= PLUME_INLET.1 + TOL
}

/// Open outlet segment on `x = 1`, the only Neumann part of the boundary.
pub fn on_plume_outlet(x: [f64; 2]) -> bool {
    (x[0] - 1.0).abs() < TOL && x[1] > PLUME_OUTLET.0 + TOL && x[1] < PLUME_OUTLET.1 - TOL
}

/// Distance to the line through the inlet and outlet centers.
pub fn distance_to_plume_axis(x: [f64; 2]) -> f64 {
    let p = [0.0, 0.5 * (PLUME_INLET.0 + PLUME_INLET.1)];
    let q = [1.0, 0.5 * (PLUME_OUTLET.0 + PLUME_OUTLET.1)];
    let d = [q[0] - p[0], q[1] - p[1]];
    ((x[0] - p[0]) * d[1] - (x[1] - p[1]) * d[0]).abs() / d[0].hypot(d[1])
}

pub fn plume_coefficients() -> CdrCoefficients {
    CdrCoefficients {
        eps: 1e-6,
        convection: Arc::new(|_| [1.0, -0.25]),
        reaction: Arc::new(|x| if distance_to_plume_axis(x) <= 0.1 { 1.0 } else { 0.0 }),
        source: Arc::new(|_| 0.0),
        supg: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inflow_schedule() {
        assert!((inflow_value(0.5) - (PI / 4.0).sin()).abs() < 1e-15);
        assert_eq!(inflow_value(1.5), 1.0);
        assert!((inflow_value(2.5) - (0.75 * PI).sin()).abs() < 1e-15);
        assert!(inflow_value(0.0).abs() < 1e-15);
        assert!((inflow_value(3.0)).abs() < 1e-15);
    }

    #[test]
    fn plume_geometry() {
        assert!(on_plume_inlet([0.0, 0.625]) && on_plume_inlet([0.0, 0.75]));
        assert!(!on_plume_inlet([0.0, 0.6]));
        assert!(on_plume_outlet([1.0, 0.4]) && !on_plume_outlet([1.0, 0.375]));
        // the axis joins (0, 11/16) and (1, 7/16)
        assert!(distance_to_plume_axis([0.0, 11.0 / 16.0]) < 1e-15);
        assert!(distance_to_plume_axis([1.0, 7.0 / 16.0]) < 1e-15);
        assert!(distance_to_plume_axis([0.5, 0.5625]) < 1e-15);
    }

    #[test]
    fn parse_names() {
        for p in ProblemKind::ALL {
            assert_eq!(p.name().parse::<ProblemKind>().unwrap(), p);
        }
        assert_eq!("Hemker2D".parse::<ProblemKind>().unwrap(), ProblemKind::Hemker2D);
        assert!("cube3d".parse::<ProblemKind>().is_err());
    }
}
