//! Boundary-fitted structured mesh by transfinite (Coons) interpolation.
//!
//! The unit square `(u, v)` is mapped onto Ω with `u = 0` on the wing face,
//! `u = 1` on the Mach arc, `v = 0` on `sy2` and `v = 1` on `sy1`.

use super::{Domain, Side};
use crate::error::{Error, Result};
use crate::field::Vec2;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeTag {
    Interior,
    Cone,
    Py,
    Sy1,
    Sy2,
    /// Corner `P_k`, `k` in 1..=4.
    Corner(u8),
}

impl NodeTag {
    pub fn label(self) -> &'static str {
        match self {
            NodeTag::Interior => "interior",
            NodeTag::Cone => "cone",
            NodeTag::Py => "py",
            NodeTag::Sy1 => "sy1",
            NodeTag::Sy2 => "sy2",
            NodeTag::Corner(1) => "P1",
            NodeTag::Corner(2) => "P2",
            NodeTag::Corner(3) => "P3",
            NodeTag::Corner(_) => "P4",
        }
    }

    /// True on the Mach arc, including its end points P1 and P2.
    pub fn on_cone(self) -> bool {
        matches!(self, NodeTag::Cone | NodeTag::Corner(1) | NodeTag::Corner(2))
    }
}

/// Derivatives of the map `(u, v) → ξ` at one node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDerivatives {
    pub x_u: Vec2,
    pub x_v: Vec2,
    pub x_uu: Vec2,
    pub x_uv: Vec2,
    pub x_vv: Vec2,
    /// Rows are `∇u` and `∇v` with respect to ξ.
    pub inverse: [Vec2; 2],
    /// Oriented Jacobian `∂ξ₁/∂v ∂ξ₂/∂u − ∂ξ₁/∂u ∂ξ₂/∂v`. The `(u, v)` frame is
    /// left-handed relative to ξ, so this is positive for an unfolded map.
    pub det: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mesh {
    pub n_u: usize,
    pub n_v: usize,
    pub nodes: Vec<Vec2>,
    pub metrics: Vec<MapDerivatives>,
    pub boundary_tags: Vec<NodeTag>,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_u + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.n_u, k / self.n_u)
    }

    pub fn hu(&self) -> f64 {
        1.0 / (self.n_u - 1) as f64
    }

    pub fn hv(&self) -> f64 {
        1.0 / (self.n_v - 1) as f64
    }

    /// Largest mapped grid spacing.
    pub fn h(&self) -> f64 {
        self.hu().max(self.hv())
    }

    /// Distance `1 − u` from the Mach arc in the mapped square.
    pub fn mapped_distance_to_cone(&self, k: usize) -> f64 {
        let (i, _) = self.ij(k);
        (self.n_u - 1 - i) as f64 * self.hu()
    }

    /// Number of cells between node `k` and the Mach arc.
    pub fn cells_from_cone(&self, k: usize) -> usize {
        self.n_u - 1 - self.ij(k).0
    }
}

/// Coons-patch image of `(u, v)` and its derivatives.
pub fn transfinite_point(domain: &Domain, u: f64, v: f64) -> (Vec2, MapDerivatives) {
    let at = |side, t| domain.boundary_point(side, t).expect("parameter in [0, 1]");
    let left = at(Side::Py, v);
    let right = at(Side::Cone, v);
    let bottom = at(Side::Sy2, u);
    let top = at(Side::Sy1, u);
    let (dl, ddl) = domain.boundary_tangent(Side::Py, v);
    let (dr, ddr) = domain.boundary_tangent(Side::Cone, v);
    let (db, ddb) = domain.boundary_tangent(Side::Sy2, u);
    let (dt, ddt) = domain.boundary_tangent(Side::Sy1, u);
    let (p1, p2, p3, p4) = (domain.p1, domain.p2, domain.p3, domain.p4);

    let mut x = [0.0; 2];
    let mut x_u = [0.0; 2];
    let mut x_v = [0.0; 2];
    let mut x_uu = [0.0; 2];
    let mut x_uv = [0.0; 2];
    let mut x_vv = [0.0; 2];
    for c in 0..2 {
        let bilinear = (1.0 - u) * (1.0 - v) * p3[c]
            + u * (1.0 - v) * p2[c]
            + (1.0 - u) * v * p4[c]
            + u * v * p1[c];
        x[c] = (1.0 - u) * left[c] + u * right[c] + (1.0 - v) * bottom[c] + v * top[c] - bilinear;
        let bil_u = (1.0 - v) * (p2[c] - p3[c]) + v * (p1[c] - p4[c]);
        let bil_v = (1.0 - u) * (p4[c] - p3[c]) + u * (p1[c] - p2[c]);
        let bil_uv = p3[c] - p2[c] - p4[c] + p1[c];
        x_u[c] = right[c] - left[c] + (1.0 - v) * db[c] + v * dt[c] - bil_u;
        x_v[c] = (1.0 - u) * dl[c] + u * dr[c] + top[c] - bottom[c] - bil_v;
        x_uu[c] = (1.0 - v) * ddb[c] + v * ddt[c];
        x_vv[c] = (1.0 - u) * ddl[c] + u * ddr[c];
        x_uv[c] = dr[c] - dl[c] + dt[c] - db[c] - bil_uv;
    }
    let det = x_v[0] * x_u[1] - x_u[0] * x_v[1];
    // ∇u = (x_v2, −x_v1)/D, ∇v = (−x_u2, x_u1)/D with D = x_u1 x_v2 − x_u2 x_v1 = −det.
    let inverse = [
        [-x_v[1] / det, x_v[0] / det],
        [x_u[1] / det, -x_u[0] / det],
    ];
    (
        x,
        MapDerivatives {
            x_u,
            x_v,
            x_uu,
            x_uv,
            x_vv,
            inverse,
            det,
        },
    )
}

/// Structured `n_u × n_v` mesh of Ω. Edge nodes are placed directly on their
/// boundary curves so Dirichlet and Neumann rows see exact geometry.
pub fn build_mesh(domain: &Domain, n_u: usize, n_v: usize) -> Result<Mesh> {
    if n_u < 9 || n_v < 9 {
        return Err(Error::MeshTooSmall { n_u, n_v });
    }
    let len = n_u * n_v;
    let mut nodes = Vec::with_capacity(len);
    let mut metrics = Vec::with_capacity(len);
    let mut boundary_tags = Vec::with_capacity(len);
    for j in 0..n_v {
        let v = j as f64 / (n_v - 1) as f64;
        for i in 0..n_u {
            let u = i as f64 / (n_u - 1) as f64;
            let (interp, metric) = transfinite_point(domain, u, v);
            let (tag, point) = match (i, j) {
                (0, 0) => (NodeTag::Corner(3), domain.p3),
                (0, jj) if jj == n_v - 1 => (NodeTag::Corner(4), domain.p4),
                (ii, 0) if ii == n_u - 1 => (NodeTag::Corner(2), domain.p2),
                (ii, jj) if ii == n_u - 1 && jj == n_v - 1 => (NodeTag::Corner(1), domain.p1),
                (0, _) => (NodeTag::Py, domain.boundary_point(Side::Py, v)?),
                (ii, _) if ii == n_u - 1 => (NodeTag::Cone, domain.boundary_point(Side::Cone, v)?),
                (_, 0) => (NodeTag::Sy2, domain.boundary_point(Side::Sy2, u)?),
                (_, jj) if jj == n_v - 1 => (NodeTag::Sy1, domain.boundary_point(Side::Sy1, u)?),
                _ => (NodeTag::Interior, interp),
            };
            if !(metric.det > 0.0) {
                return Err(Error::FoldedMesh {
                    i,
                    j,
                    det: metric.det,
                });
            }
            debug_assert!(domain.contains(point), "node ({i}, {j}) outside domain");
            nodes.push(point);
            metrics.push(metric);
            boundary_tags.push(tag);
        }
    }
    Ok(Mesh {
        n_u,
        n_v,
        nodes,
        metrics,
        boundary_tags,
    })
}
