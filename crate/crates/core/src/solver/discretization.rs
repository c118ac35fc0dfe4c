use rayon::prelude::*;

use crate::field::{dot, norm2, Sym2, Vec2};
use crate::fields::{
    boundary_linearization, interior_linearization, interior_residual, s_interior_linearization,
    s_interior_residual, Linearization,
};
use crate::geometry::{Domain, Mesh, Side};
use crate::solver::coloring::{color_columns, transpose};
use crate::solver::sparse::SparseMatrix;

/// Which boundary or interior condition a node's equation imposes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Interior,
    /// Dirichlet row on the Mach arc, including P1 and P2.
    Cone,
    /// Oblique row on the wing face, including P3 and P4.
    Py,
    Sy1,
    Sy2,
}

impl RowKind {
    pub fn side(self) -> Option<Side> {
        match self {
            RowKind::Interior => None,
            RowKind::Cone => Some(Side::Cone),
            RowKind::Py => Some(Side::Py),
            RowKind::Sy1 => Some(Side::Sy1),
            RowKind::Sy2 => Some(Side::Sy2),
        }
    }
}

/// Unknown used for the nodal values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Formulation {
    /// The potential `φ` itself.
    #[default]
    Phi,
    /// `s` with `φ = √(1+|ξ|²) cosh s`.
    S,
}

/// Finite-difference operators on a boundary-fitted mesh.
///
/// Gradients and Hessians at a node are linear combinations of nodal values.
/// The map derivatives entering the chain rule are obtained by applying the
/// same difference stencils to the node coordinates, so any field linear in
/// `ξ` is differentiated exactly.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub domain: Domain,
    pub mesh: Mesh,
    pub kinds: Vec<RowKind>,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    grad_w: Vec<Vec2>,
    hess_w: Vec<[f64; 3]>,
    /// Rows whose pattern holds each column.
    col_rows: Vec<Vec<usize>>,
    colors: Vec<usize>,
    n_colors: usize,
}

/// Second-order first-derivative weights at index `i` of `0..n`.
fn d1(i: usize, n: usize, h: f64) -> [(usize, f64); 3] {
    let c = 0.5 / h;
    if i == 0 {
        [(0, -3.0 * c), (1, 4.0 * c), (2, -c)]
    } else if i == n - 1 {
        [(n - 1, 3.0 * c), (n - 2, -4.0 * c), (n - 3, c)]
    } else {
        [(i - 1, -c), (i, 0.0), (i + 1, c)]
    }
}

fn d2(i: usize, h: f64) -> [(usize, f64); 3] {
    let c = 1.0 / (h * h);
    [(i - 1, c), (i, -2.0 * c), (i + 1, c)]
}

struct Builder {
    entries: Vec<(usize, Vec2, [f64; 3])>,
}

impl Builder {
    fn slot(&mut self, col: usize) -> &mut (usize, Vec2, [f64; 3]) {
        let pos = match self.entries.iter().position(|e| e.0 == col) {
            Some(p) => p,
            None => {
                self.entries.push((col, [0.0; 2], [0.0; 3]));
                self.entries.len() - 1
            }
        };
        &mut self.entries[pos]
    }
}

fn row_kind(i: usize, j: usize, n_u: usize, n_v: usize) -> RowKind {
    if i == n_u - 1 {
        RowKind::Cone
    } else if i == 0 {
        RowKind::Py
    } else if j == 0 {
        RowKind::Sy2
    } else if j == n_v - 1 {
        RowKind::Sy1
    } else {
        RowKind::Interior
    }
}

impl Discretization {
    pub fn new(domain: &Domain, mesh: &Mesh) -> Self {
        let (n_u, n_v) = (mesh.n_u, mesh.n_v);
        let (hu, hv) = (mesh.hu(), mesh.hv());
        let mut kinds = Vec::with_capacity(mesh.len());
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut grad_w = Vec::new();
        let mut hess_w = Vec::new();
        for k in 0..mesh.len() {
            let (i, j) = mesh.ij(k);
            let kind = row_kind(i, j, n_u, n_v);
            kinds.push(kind);
            let idx = |a: usize, b: usize| b * n_u + a;
            let apply = |w: &[(usize, f64)], f: &dyn Fn(usize) -> usize| {
                w.iter().fold([0.0; 2], |acc, &(m, c)| {
                    let x = mesh.nodes[f(m)];
                    [acc[0] + c * x[0], acc[1] + c * x[1]]
                })
            };
            let du = d1(i, n_u, hu);
            let dv = d1(j, n_v, hv);
            let x_u = apply(&du, &|a| idx(a, j));
            let x_v = apply(&dv, &|b| idx(i, b));
            let det = x_u[0] * x_v[1] - x_v[0] * x_u[1];
            // K = J^{-T} with J = [x_u | x_v]
            let kmat = [[x_v[1] / det, -x_u[1] / det], [-x_v[0] / det, x_u[0] / det]];
            let mut b = Builder { entries: Vec::with_capacity(9) };
            for &(a, c) in &du {
                let e = b.slot(idx(a, j));
                e.1[0] += kmat[0][0] * c;
                e.1[1] += kmat[1][0] * c;
            }
            for &(bb, c) in &dv {
                let e = b.slot(idx(i, bb));
                e.1[0] += kmat[0][1] * c;
                e.1[1] += kmat[1][1] * c;
            }
            if kind == RowKind::Interior {
                let duu = d2(i, hu);
                let dvv = d2(j, hv);
                let cuv = 0.25 / (hu * hv);
                let duv = [
                    (idx(i + 1, j + 1), cuv),
                    (idx(i - 1, j - 1), cuv),
                    (idx(i + 1, j - 1), -cuv),
                    (idx(i - 1, j + 1), -cuv),
                ];
                let x_uu = apply(&duu, &|a| idx(a, j));
                let x_vv = apply(&dvv, &|bb| idx(i, bb));
                let x_uv = apply(&duv, &|m| m);
                // M = [[φ_uu − g·x_uu, φ_uv − g·x_uv], [·, φ_vv − g·x_vv]]
                let mut m_w: Vec<(usize, [f64; 3])> = Vec::with_capacity(9);
                let mut add_m = |col: usize, d: [f64; 3]| match m_w.iter_mut().find(|e| e.0 == col) {
                    Some(e) => (0..3).for_each(|q| e.1[q] += d[q]),
                    None => m_w.push((col, d)),
                };
                for &(a, c) in &duu {
                    add_m(idx(a, j), [c, 0.0, 0.0]);
                }
                for &(bb, c) in &dvv {
                    add_m(idx(i, bb), [0.0, 0.0, c]);
                }
                for &(col, c) in &duv {
                    add_m(col, [0.0, c, 0.0]);
                }
                for e in b.entries.clone() {
                    let g = e.1;
                    add_m(e.0, [-dot(g, x_uu), -dot(g, x_uv), -dot(g, x_vv)]);
                }
                let kk = kmat;
                for (col, m) in m_w {
                    let h11 = kk[0][0] * kk[0][0] * m[0] + 2.0 * kk[0][0] * kk[0][1] * m[1] + kk[0][1] * kk[0][1] * m[2];
                    let h12 = kk[0][0] * kk[1][0] * m[0]
                        + (kk[0][0] * kk[1][1] + kk[0][1] * kk[1][0]) * m[1]
                        + kk[0][1] * kk[1][1] * m[2];
                    let h22 = kk[1][0] * kk[1][0] * m[0] + 2.0 * kk[1][0] * kk[1][1] * m[1] + kk[1][1] * kk[1][1] * m[2];
                    b.slot(col).2 = [h11, h12, h22];
                }
            }
            // center first
            b.slot(k);
            b.entries.sort_by_key(|e| (e.0 != k, e.0));
            for (col, g, h) in b.entries {
                cols.push(col);
                grad_w.push(g);
                hess_w.push(h);
            }
            offsets.push(cols.len());
        }
        let mut disc = Self {
            domain: domain.clone(),
            mesh: mesh.clone(),
            kinds,
            offsets,
            cols,
            grad_w,
            hess_w,
            col_rows: Vec::new(),
            colors: Vec::new(),
            n_colors: 0,
        };
        let pattern = disc.pattern();
        disc.col_rows = transpose(&pattern);
        let (colors, n_colors) = color_columns(&pattern, &disc.col_rows);
        disc.colors = colors;
        disc.n_colors = n_colors;
        disc
    }

    /// Number of colors used by [`Discretization::jacobian_colored`].
    pub fn n_colors(&self) -> usize {
        self.n_colors
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    /// Column indices each row depends on, center first.
    pub fn stencil(&self, k: usize) -> &[usize] {
        &self.cols[self.offsets[k]..self.offsets[k + 1]]
    }

    /// Nonzero pattern of the residual Jacobian.
    pub fn pattern(&self) -> Vec<Vec<usize>> {
        (0..self.len())
            .map(|k| match self.kinds[k] {
                RowKind::Cone => vec![k],
                _ => self.stencil(k).to_vec(),
            })
            .collect()
    }

    /// Discrete gradient at any node.
    pub fn gradient(&self, k: usize, values: &[f64]) -> Vec2 {
        let center = values[k];
        let mut g = [0.0; 2];
        for p in self.offsets[k]..self.offsets[k + 1] {
            let d = values[self.cols[p]] - center;
            g[0] += self.grad_w[p][0] * d;
            g[1] += self.grad_w[p][1] * d;
        }
        g
    }

    /// Discrete Hessian; `None` off the interior.
    pub fn hessian(&self, k: usize, values: &[f64]) -> Option<Sym2> {
        if self.kinds[k] != RowKind::Interior {
            return None;
        }
        let center = values[k];
        let mut h = [0.0; 3];
        for p in self.offsets[k]..self.offsets[k + 1] {
            let d = values[self.cols[p]] - center;
            for q in 0..3 {
                h[q] += self.hess_w[p][q] * d;
            }
        }
        Some(Sym2::new(h[0], h[1], h[2]))
    }

    fn cone_value(&self, k: usize, eps: f64, formulation: Formulation) -> f64 {
        let r = (1.0 + norm2(self.mesh.nodes[k])).sqrt();
        match formulation {
            Formulation::Phi => r + eps,
            Formulation::S => (1.0 + eps / r).acosh(),
        }
    }

    /// Dirichlet data on the Mach-arc nodes.
    pub fn impose_cone(&self, eps: f64, formulation: Formulation, values: &mut [f64]) {
        for k in 0..self.len() {
            if self.kinds[k] == RowKind::Cone {
                values[k] = self.cone_value(k, eps, formulation);
            }
        }
    }

    fn row_residual(&self, k: usize, mu: f64, eps: f64, formulation: Formulation, values: &[f64]) -> f64 {
        let xi = self.mesh.nodes[k];
        let center = values[k];
        match self.kinds[k] {
            RowKind::Cone => center - self.cone_value(k, eps, formulation),
            RowKind::Interior => {
                let g = self.gradient(k, values);
                let h = self.hessian(k, values).unwrap_or(Sym2::ZERO);
                match formulation {
                    Formulation::Phi => interior_residual(mu, center, g, h, xi),
                    Formulation::S => s_interior_residual(mu, center, g, h, xi).unwrap_or(f64::NAN),
                }
            }
            kind => {
                let g = self.gradient(k, values);
                let side = kind.side().expect("boundary row");
                match formulation {
                    Formulation::Phi => boundary_linearization(side, center, g, xi, &self.domain).value,
                    Formulation::S => dot(g, self.s_boundary_direction(side, xi)),
                }
            }
        }
    }

    /// Direction `d` with `Ds·d = 0` expressing a flat-side condition in `s`.
    fn s_boundary_direction(&self, side: Side, xi: Vec2) -> Vec2 {
        match side {
            Side::Py => {
                let t = self.domain.tan_sigma2();
                let nu = self.domain.nu_py;
                [nu[0] - t * xi[0], nu[1] - t * xi[1]]
            }
            other => self.domain.exterior_normal(other),
        }
    }

    fn row_linearization(&self, k: usize, mu: f64, formulation: Formulation, values: &[f64]) -> Linearization {
        let xi = self.mesh.nodes[k];
        let center = values[k];
        let g = self.gradient(k, values);
        match self.kinds[k] {
            RowKind::Cone => Linearization {
                d_phi: 1.0,
                ..Default::default()
            },
            RowKind::Interior => {
                let h = self.hessian(k, values).unwrap_or(Sym2::ZERO);
                match formulation {
                    Formulation::Phi => interior_linearization(mu, center, g, h, xi),
                    Formulation::S => s_interior_linearization(mu, center, g, h, xi).unwrap_or(Linearization {
                        value: f64::NAN,
                        d_phi: f64::NAN,
                        ..Default::default()
                    }),
                }
            }
            kind => {
                let side = kind.side().expect("boundary row");
                match formulation {
                    Formulation::Phi => boundary_linearization(side, center, g, xi, &self.domain),
                    Formulation::S => {
                        let d = self.s_boundary_direction(side, xi);
                        Linearization {
                            value: dot(g, d),
                            d_grad: d,
                            ..Default::default()
                        }
                    }
                }
            }
        }
    }

    /// Nodal residual of the discrete problem, minus an optional source.
    pub fn residual(
        &self,
        mu: f64,
        eps: f64,
        formulation: Formulation,
        values: &[f64],
        source: Option<&[f64]>,
    ) -> Vec<f64> {
        (0..self.len())
            .into_par_iter()
            .map(|k| {
                let r = self.row_residual(k, mu, eps, formulation, values);
                r - source.map_or(0.0, |s| s[k])
            })
            .collect()
    }

    /// Closed-form Jacobian of [`Discretization::residual`].
    pub fn jacobian(&self, mu: f64, formulation: Formulation, values: &[f64]) -> SparseMatrix {
        let rows: Vec<Vec<f64>> = (0..self.len())
            .into_par_iter()
            .map(|k| {
                let lin = self.row_linearization(k, mu, formulation, values);
                if self.kinds[k] == RowKind::Cone {
                    return vec![1.0];
                }
                let range = self.offsets[k]..self.offsets[k + 1];
                range
                    .map(|p| {
                        let gw = self.grad_w[p];
                        let hw = self.hess_w[p];
                        let mut v = lin.d_grad[0] * gw[0]
                            + lin.d_grad[1] * gw[1]
                            + lin.d_hess[0] * hw[0]
                            + lin.d_hess[1] * hw[1]
                            + lin.d_hess[2] * hw[2];
                        if self.cols[p] == k {
                            v += lin.d_phi;
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        SparseMatrix::from_rows(self.pattern(), rows)
    }

    /// The `μ = 0` operator divided by `c²`: `Δφ + D²φ[ξ,ξ]` inside, identity
    /// on the Mach arc, and the (linear) flat-side rows.
    pub fn mu0_operator(&self) -> SparseMatrix {
        let zero = vec![0.0; self.len()];
        let rows: Vec<Vec<f64>> = (0..self.len())
            .into_par_iter()
            .map(|k| {
                let xi = self.mesh.nodes[k];
                let range = self.offsets[k]..self.offsets[k + 1];
                match self.kinds[k] {
                    RowKind::Cone => vec![1.0],
                    RowKind::Interior => {
                        let c = [1.0 + xi[0] * xi[0], 2.0 * xi[0] * xi[1], 1.0 + xi[1] * xi[1]];
                        range
                            .map(|p| (0..3).map(|q| c[q] * self.hess_w[p][q]).sum())
                            .collect()
                    }
                    _ => {
                        let lin = self.row_linearization(k, 0.0, Formulation::Phi, &zero);
                        range
                            .map(|p| {
                                let gw = self.grad_w[p];
                                let d = if self.cols[p] == k { lin.d_phi } else { 0.0 };
                                d + lin.d_grad[0] * gw[0] + lin.d_grad[1] * gw[1]
                            })
                            .collect()
                    }
                }
            })
            .collect();
        SparseMatrix::from_rows(self.pattern(), rows)
    }

    /// Jacobian by central differences, perturbing all columns of one color
    /// at a time.
    pub fn jacobian_colored(&self, mu: f64, eps: f64, formulation: Formulation, values: &[f64]) -> SparseMatrix {
        let pattern = self.pattern();
        let mut rows: Vec<Vec<f64>> = pattern.iter().map(|p| vec![0.0; p.len()]).collect();
        let mut work = values.to_vec();
        for color in 0..self.n_colors {
            let members: Vec<usize> = (0..self.len()).filter(|&c| self.colors[c] == color).collect();
            let steps: Vec<f64> = members.iter().map(|&c| 1e-7 * (1.0 + values[c].abs())).collect();
            let mut shifted = |sign: f64| {
                for (&c, &s) in members.iter().zip(&steps) {
                    work[c] = values[c] + sign * s;
                }
                let r = self.residual(mu, eps, formulation, &work, None);
                for &c in &members {
                    work[c] = values[c];
                }
                r
            };
            let plus = shifted(1.0);
            let minus = shifted(-1.0);
            for (&c, &s) in members.iter().zip(&steps) {
                let width = (values[c] + s) - (values[c] - s);
                for &r in &self.col_rows[c] {
                    let pos = pattern[r].iter().position(|&q| q == c).expect("pattern entry");
                    rows[r][pos] = (plus[r] - minus[r]) / width;
                }
            }
        }
        SparseMatrix::from_rows(pattern, rows)
    }
}
