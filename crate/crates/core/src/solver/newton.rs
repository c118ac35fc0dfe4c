use crate::config::{JacobianMode, NewtonOptions};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::fields::principal_coefficients;
use crate::solver::banded::BandedLu;
use crate::solver::discretization::{Discretization, Formulation, RowKind};
use crate::solver::sparse::SparseMatrix;

/// A converged (or abandoned) Newton solve at one `(μ, ε)` pair.
#[derive(Clone, Debug)]
pub struct Solution {
    pub field: ScalarField,
    pub mu: f64,
    pub eps: f64,
    pub converged: bool,
    /// Residual sup-norm before each iteration and after the last one.
    pub residual_history: Vec<f64>,
}

impl Solution {
    pub fn iterations(&self) -> usize {
        self.residual_history.len().saturating_sub(1)
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// A discrete problem instance: operator, parameters and optional source.
#[derive(Clone, Copy, Debug)]
pub struct Problem<'a> {
    pub disc: &'a Discretization,
    pub mu: f64,
    pub eps: f64,
    pub formulation: Formulation,
    pub source: Option<&'a [f64]>,
}

fn sup_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m: f64, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

impl<'a> Problem<'a> {
    pub fn new(disc: &'a Discretization, mu: f64, eps: f64) -> Self {
        Self {
            disc,
            mu,
            eps,
            formulation: Formulation::Phi,
            source: None,
        }
    }

    pub fn with_formulation(mut self, formulation: Formulation) -> Self {
        self.formulation = formulation;
        self
    }

    pub fn with_source(mut self, source: &'a [f64]) -> Self {
        self.source = Some(source);
        self
    }

    pub fn residual(&self, values: &[f64]) -> Vec<f64> {
        self.disc.residual(self.mu, self.eps, self.formulation, values, self.source)
    }

    pub fn jacobian(&self, values: &[f64], mode: JacobianMode) -> SparseMatrix {
        match mode {
            JacobianMode::Analytic => self.disc.jacobian(self.mu, self.formulation, values),
            JacobianMode::ColoredDifference => {
                self.disc.jacobian_colored(self.mu, self.eps, self.formulation, values)
            }
        }
    }

    /// Damped Newton iteration from `start`, which must satisfy the Dirichlet
    /// rows already.
    pub fn solve(&self, start: &[f64], opts: &NewtonOptions) -> Result<Solution> {
        let disc = self.disc;
        let mut values = start.to_vec();
        let mut r = self.residual(&values);
        for k in 0..disc.len() {
            if disc.kinds[k] == RowKind::Cone && r[k].abs() > 1e-12 {
                return Err(Error::Precondition(format!(
                    "start violates the Mach-arc condition at node {k} by {:e}",
                    r[k]
                )));
            }
        }
        let mut norm = sup_norm(&r);
        if !norm.is_finite() {
            return Err(self.diverged("non-finite residual at start"));
        }
        let mut history = vec![norm];
        let mut iter = 0;
        while norm > opts.tol && iter < opts.max_iter {
            let jac = self.jacobian(&values, opts.jacobian_mode);
            let lu = BandedLu::factor(&jac).map_err(|z| self.singular(z.row, &values))?;
            let mut step: Vec<f64> = r.iter().map(|v| -v).collect();
            lu.solve(&mut step);
            for k in 0..disc.len() {
                if disc.kinds[k] == RowKind::Cone {
                    step[k] = 0.0;
                }
            }
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..=opts.max_backtracks {
                let trial: Vec<f64> = values.iter().zip(&step).map(|(v, d)| v + lambda * d).collect();
                let tr = self.residual(&trial);
                let tn = sup_norm(&tr);
                if tn.is_finite() && tn < norm {
                    accepted = Some((trial, tr, tn));
                    break;
                }
                lambda *= 0.5;
            }
            let Some((trial, tr, tn)) = accepted else {
                return Err(self.diverged(&format!(
                    "no decrease after {} backtracks from residual {norm:e}",
                    opts.max_backtracks
                )));
            };
            values = trial;
            r = tr;
            norm = tn;
            history.push(norm);
            iter += 1;
        }
        Ok(Solution {
            field: ScalarField::new(disc.mesh.n_u, disc.mesh.n_v, values, self.mu, self.eps),
            mu: self.mu,
            eps: self.eps,
            converged: norm <= opts.tol,
            residual_history: history,
        })
    }

    fn diverged(&self, reason: &str) -> Error {
        Error::Diverged {
            mu: self.mu,
            eps: self.eps,
            reason: reason.to_string(),
        }
    }

    /// Reports the node where the principal part is least positive.
    fn singular(&self, pivot_row: usize, values: &[f64]) -> Error {
        let disc = self.disc;
        let mut worst = (pivot_row, f64::INFINITY);
        if self.formulation == Formulation::Phi {
            for k in 0..disc.len() {
                if disc.kinds[k] != RowKind::Interior {
                    continue;
                }
                let g = disc.gradient(k, values);
                let e = principal_coefficients(self.mu, values[k], g, disc.mesh.nodes[k]).eigenvalues[0];
                if e < worst.1 {
                    worst = (k, e);
                }
            }
        }
        Error::SingularJacobian {
            pivot_row,
            node: worst.0,
            min_eigenvalue: worst.1,
        }
    }
}

/// Newton solve of the `φ` problem at `(μ, ε)`.
pub fn newton_solve(
    disc: &Discretization,
    mu: f64,
    eps: f64,
    start: &ScalarField,
    opts: &NewtonOptions,
) -> Result<Solution> {
    Problem::new(disc, mu, eps).solve(&start.values, opts)
}

/// Solution of the `μ = 0` problem.
///
/// At `μ = 0` the interior operator is `c²` times a linear operator, so the
/// zero set with `c² > 0` is found by one linear solve from the start field
/// `max(v, √(1+|ξ|²) + ε)`; Newton then removes the rounding left by the
/// linear solve.
pub fn initial_guess(disc: &Discretization, eps: f64, opts: &NewtonOptions) -> Result<Solution> {
    let v = disc.domain.v3inf;
    let mut values: Vec<f64> = disc
        .mesh
        .nodes
        .iter()
        .map(|xi| v.max((1.0 + xi[0] * xi[0] + xi[1] * xi[1]).sqrt() + eps))
        .collect();
    disc.impose_cone(eps, Formulation::Phi, &mut values);
    let linear = disc.mu0_operator();
    let mut rhs = vec![0.0; disc.len()];
    disc.impose_cone(eps, Formulation::Phi, &mut rhs);
    let affine = |x: &[f64]| -> Vec<f64> { linear.mul_vec(x).iter().zip(&rhs).map(|(a, b)| a - b).collect() };
    let r = affine(&values);
    let lu = BandedLu::factor(&linear).map_err(|z| Error::LinearSolveFailure(z.value))?;
    let mut step: Vec<f64> = r.iter().map(|x| -x).collect();
    lu.solve(&mut step);
    for k in 0..disc.len() {
        if disc.kinds[k] == RowKind::Cone {
            step[k] = 0.0;
        }
        values[k] += step[k];
    }
    let after = sup_norm(&affine(&values));
    if !after.is_finite() || after > 1e-6 {
        return Err(Error::LinearSolveFailure(after));
    }
    for k in 0..disc.len() {
        if disc.kinds[k] == RowKind::Interior {
            let g = disc.gradient(k, &values);
            let xi = disc.mesh.nodes[k];
            let chi = values[k] - g[0] * xi[0] - g[1] * xi[1];
            let c2 = g[0] * g[0] + g[1] * g[1] + chi * chi - 1.0;
            if !(c2 > 0.0) {
                return Err(Error::LinearSolveFailure(c2));
            }
        }
    }
    let sol = Problem::new(disc, 0.0, eps).solve(&values, opts)?;
    if !sol.converged {
        return Err(Error::LinearSolveFailure(sol.final_residual()));
    }
    Ok(sol)
}
