//! Wing, Mach cone and the self-similar domain in conical coordinates.
//!
//! The quarter domain Ω is bounded by four pieces:
//!
//! ```text
//!            ξ₂
//!            |
//!      P1 *  |           cone: Mach-circle arc P2 -> P1, |ξ| = R∞
//!       .    |  sy1      sy1 : ξ₁ = 0, segment P4 -> P1
//!     .      * P4        py  : wing face, segment P3 -> P4
//!   .   Ω   /|           sy2 : ξ₂ = 0, segment P3 -> P2
//!  .       / |
//! *-------*--+---- ξ₁
//! P2  sy2 P3 O
//! ```

mod mesh;

pub use mesh::{build_mesh, transfinite_point, MapDerivatives, Mesh, NodeTag};

use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::field::{dot, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Absolute tolerance, in ξ units, for membership and on-boundary tests.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Half vertex angle of the Mach cone of the freestream, `arcsin(√(v²−1)/v)`.
pub fn critical_angle(v3inf: f64) -> Result<f64> {
    if !(v3inf > 1.0) {
        return Err(Error::NonSupersonic(v3inf));
    }
    Ok(((v3inf - 1.0) * (v3inf + 1.0)).sqrt().atan())
}

/// The four boundary pieces of Ω.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Mach-circle arc, the degenerate Dirichlet boundary.
    Cone,
    /// Wing face carrying the oblique condition.
    Py,
    /// Symmetry plane `ξ₁ = 0`.
    Sy1,
    /// Symmetry plane `ξ₂ = 0`.
    Sy2,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Cone, Side::Py, Side::Sy1, Side::Sy2];

    pub fn name(self) -> &'static str {
        match self {
            Side::Cone => "cone",
            Side::Py => "py",
            Side::Sy1 => "sy1",
            Side::Sy2 => "sy2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub sigma1: f64,
    pub sigma2: f64,
    pub v3inf: f64,
    pub p1: Vec2,
    pub p2: Vec2,
    pub p3: Vec2,
    pub p4: Vec2,
    pub mach_radius: f64,
    pub nu_py: Vec2,
    pub nu_sy1: Vec2,
    pub nu_sy2: Vec2,
    /// `(a, b, c)` with `a ξ₁ + b ξ₂ + c = 0` on the wing face.
    pub py_line: [f64; 3],
}

pub fn build_domain(config: &ProblemConfig) -> Result<Domain> {
    let critical = critical_angle(config.v3inf)?;
    for (name, angle) in [("sigma1", config.sigma1), ("sigma2", config.sigma2)] {
        if !(angle > 0.0) {
            return Err(Error::InvalidConfig(format!("{name} = {angle} must be positive")));
        }
        if angle >= critical {
            return Err(Error::AngleTooLarge {
                name,
                angle,
                critical,
            });
        }
    }
    let v = config.v3inf;
    let radius = (v * v - 1.0).sqrt();
    let (t1, t2) = (config.sigma1.tan(), config.sigma2.tan());
    let slope = t2 / t1;
    let nu_py = [1.0, -slope];
    Ok(Domain {
        sigma1: config.sigma1,
        sigma2: config.sigma2,
        v3inf: v,
        p1: [0.0, radius],
        p2: [-radius, 0.0],
        p3: [-t2, 0.0],
        p4: [0.0, t1],
        mach_radius: radius,
        nu_py,
        nu_sy1: [1.0, 0.0],
        nu_sy2: [0.0, -1.0],
        py_line: [1.0, -slope, t2],
    })
}

impl Domain {
    pub fn tan_sigma2(&self) -> f64 {
        self.py_line[2]
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [self.p1, self.p2, self.p3, self.p4]
    }

    pub fn exterior_normal(&self, side: Side) -> Vec2 {
        match side {
            Side::Cone => [0.0, 0.0],
            Side::Py => self.nu_py,
            Side::Sy1 => self.nu_sy1,
            Side::Sy2 => self.nu_sy2,
        }
    }

    /// Signed value of the defining equation of `side` at `xi`; zero on the
    /// boundary piece. For the cone this is `|ξ| − R∞`.
    pub fn side_defect(&self, side: Side, xi: Vec2) -> f64 {
        match side {
            Side::Cone => xi[0].hypot(xi[1]) - self.mach_radius,
            Side::Py => dot(xi, self.nu_py) + self.tan_sigma2(),
            Side::Sy1 => xi[0],
            Side::Sy2 => xi[1],
        }
    }

    /// Point on a boundary piece. The cone runs from P2 (`t = 0`) to P1, the
    /// wing face from P3 to P4, `sy2` from P3 to P2 and `sy1` from P4 to P1.
    pub fn boundary_point(&self, side: Side, t: f64) -> Result<Vec2> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::BadParameter(t));
        }
        Ok(match side {
            Side::Cone => {
                if t == 1.0 {
                    self.p1
                } else {
                    let angle = t * FRAC_PI_2;
                    [-self.mach_radius * angle.cos(), self.mach_radius * angle.sin()]
                }
            }
            Side::Py => lerp(self.p3, self.p4, t),
            Side::Sy2 => lerp(self.p3, self.p2, t),
            Side::Sy1 => lerp(self.p4, self.p1, t),
        })
    }

    /// First and second derivatives of [`Domain::boundary_point`] in `t`.
    pub fn boundary_tangent(&self, side: Side, t: f64) -> (Vec2, Vec2) {
        let sub = |a: Vec2, b: Vec2| [b[0] - a[0], b[1] - a[1]];
        match side {
            Side::Cone => {
                let angle = t * FRAC_PI_2;
                let (s, c) = angle.sin_cos();
                let r = self.mach_radius;
                let w = FRAC_PI_2;
                ([r * w * s, r * w * c], [r * w * w * c, -r * w * w * s])
            }
            Side::Py => (sub(self.p3, self.p4), [0.0, 0.0]),
            Side::Sy2 => (sub(self.p3, self.p2), [0.0, 0.0]),
            Side::Sy1 => (sub(self.p4, self.p1), [0.0, 0.0]),
        }
    }

    /// Closed-region membership: the quarter plane `ξ₁ ≤ 0, ξ₂ ≥ 0`, inside
    /// the Mach circle and on the flow side of the wing face.
    pub fn contains(&self, xi: Vec2) -> bool {
        xi[0] <= BOUNDARY_TOL
            && xi[1] >= -BOUNDARY_TOL
            && xi[0].hypot(xi[1]) - self.mach_radius <= BOUNDARY_TOL
            && dot(xi, self.nu_py) + self.tan_sigma2() <= BOUNDARY_TOL
    }
}

/// `(1 − t) a + t b`, exact at both endpoints.
fn lerp(a: Vec2, b: Vec2, t: f64) -> Vec2 {
    [(1.0 - t) * a[0] + t * b[0], (1.0 - t) * a[1] + t * b[1]]
}

/// Points on the shock surface (the Mach cone `v² x₃² = |x|²`) at unit height,
/// restricted to the computational quarter `x₁ ≤ 0, x₂ ≥ 0`.
pub fn shock_cone_sample(config: &ProblemConfig, n: usize) -> Result<Vec<[f64; 3]>> {
    if n == 0 {
        return Err(Error::Precondition("shock sample count must be positive".into()));
    }
    let domain = build_domain(config)?;
    let params: Vec<f64> = if n == 1 {
        vec![0.5]
    } else {
        (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
    };
    params
        .into_iter()
        .map(|t| {
            let p = domain.boundary_point(Side::Cone, t)?;
            Ok([p[0], p[1], 1.0])
        })
        .collect()
}
