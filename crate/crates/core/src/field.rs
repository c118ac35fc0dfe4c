//! Small value types shared across modules.

use serde::{Deserialize, Serialize};

pub type Vec2 = [f64; 2];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm2(a: Vec2) -> f64 {
    dot(a, a)
}

/// Symmetric 2x2 matrix, used for Hessians and principal coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 {
        xx: 0.0,
        xy: 0.0,
        yy: 0.0,
    };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// `D²f[a, b]` for the matrix of second derivatives of `f`.
    pub fn bilinear(&self, a: Vec2, b: Vec2) -> f64 {
        a[0] * b[0] * self.xx + (a[0] * b[1] + a[1] * b[0]) * self.xy + a[1] * b[1] * self.yy
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        [
            self.xx * v[0] + self.xy * v[1],
            self.xy * v[0] + self.yy * v[1],
        ]
    }

    /// `Σ a_ij h_ij` with both off-diagonal entries counted.
    pub fn contract(&self, h: &Sym2) -> f64 {
        self.xx * h.xx + 2.0 * self.xy * h.xy + self.yy * h.yy
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let radius = half_diff.hypot(self.xy);
        [mean - radius, mean + radius]
    }
}

/// Nodal values on a mesh together with the `(μ, ε)` pair they solve.
///
/// Values are stored with the `u` index running fastest: node `(i, j)` lives
/// at `j * n_u + i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub n_u: usize,
    pub n_v: usize,
    pub values: Vec<f64>,
    pub mu: f64,
    pub eps: f64,
}

impl ScalarField {
    pub fn new(n_u: usize, n_v: usize, values: Vec<f64>, mu: f64, eps: f64) -> Self {
        assert_eq!(values.len(), n_u * n_v, "field size does not match grid");
        Self {
            n_u,
            n_v,
            values,
            mu,
            eps,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n_u + i]
    }

    /// Largest absolute nodal difference.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
