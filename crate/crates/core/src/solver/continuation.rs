use crate::config::{NewtonOptions, ProblemConfig};
use crate::error::{Error, Result};
use crate::field::{norm2, ScalarField};
use crate::geometry::{build_domain, Mesh};
use crate::solver::discretization::{Discretization, Formulation};
use crate::solver::newton::{initial_guess, Problem, Solution};

/// Halvings of a failed `μ` step before giving up.
pub const MAX_HALVINGS: u32 = 4;

/// Node where a solution dips below `√(1+|ξ|²) + ε − 10h²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MembershipFailure {
    pub mu: f64,
    pub eps: f64,
    pub node: usize,
    pub shortfall: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    /// One solution per `(ε, μ)` schedule entry, `ε` outermost.
    pub solutions: Vec<Solution>,
    /// Sup-norm differences of the final-`μ` solutions at consecutive `ε`.
    pub cauchy_deltas: Vec<f64>,
    /// Estimate of the `ε → 0` limit by extrapolation linear in `ε`; equal
    /// to the last solution when the schedule has a single `ε`.
    pub extrapolated: ScalarField,
    pub membership_failures: Vec<MembershipFailure>,
    /// Intermediate `μ` values inserted by step halving.
    pub inserted_steps: Vec<(f64, f64)>,
}

impl SweepResult {
    /// The `μ = 1` solution at the smallest `ε`.
    pub fn final_solution(&self) -> &Solution {
        self.solutions.last().expect("sweep has at least one solution")
    }

    /// Final-`μ` solution for each `ε` in schedule order.
    pub fn finals(&self) -> Vec<&Solution> {
        let mut out: Vec<&Solution> = Vec::new();
        for s in &self.solutions {
            match out.last() {
                Some(prev) if prev.eps == s.eps => *out.last_mut().unwrap() = s,
                _ => out.push(s),
            }
        }
        out
    }
}

/// Nodes with `φ < √(1+|ξ|²) + ε − 10h²`.
pub fn membership_failures(mesh: &Mesh, solution: &Solution) -> Vec<MembershipFailure> {
    let slack = 10.0 * mesh.h() * mesh.h();
    mesh.nodes
        .iter()
        .zip(&solution.field.values)
        .enumerate()
        .filter_map(|(k, (xi, phi))| {
            let floor = (1.0 + norm2(*xi)).sqrt() + solution.eps - slack;
            (*phi < floor).then_some(MembershipFailure {
                mu: solution.mu,
                eps: solution.eps,
                node: k,
                shortfall: floor - phi,
            })
        })
        .collect()
}

/// Advances a solution from `from.mu` to `target`, halving failed steps.
fn advance(
    disc: &Discretization,
    from: Solution,
    target: f64,
    opts: &NewtonOptions,
    inserted: &mut Vec<(f64, f64)>,
) -> Result<Solution> {
    let eps = from.eps;
    let mut current = from;
    let mut halvings = 0;
    let mut step = target - current.mu;
    loop {
        let mu = if halvings == 0 { target } else { current.mu + step };
        let attempt = Problem::new(disc, mu, eps).solve(&current.field.values, opts);
        match attempt {
            Ok(sol) if sol.converged => {
                if mu == target {
                    return Ok(sol);
                }
                inserted.push((mu, eps));
                current = sol;
                step = target - current.mu;
                halvings = 0;
            }
            _ => {
                if halvings == MAX_HALVINGS {
                    return Err(Error::ContinuationStuck {
                        from: current.mu,
                        to: target,
                        eps,
                    });
                }
                halvings += 1;
                step *= 0.5;
            }
        }
    }
}

/// Continuation in `μ` inside a sweep of decreasing `ε`, every solve warm
/// started from the previous one.
pub fn continuation_run(config: &ProblemConfig, mesh: &Mesh) -> Result<SweepResult> {
    config.validate()?;
    let domain = build_domain(config)?;
    let disc = Discretization::new(&domain, mesh);
    let opts = &config.newton;
    let mut solutions = Vec::new();
    let mut failures = Vec::new();
    let mut inserted = Vec::new();
    let mut previous_start: Option<Solution> = None;
    for &eps in &config.eps_schedule {
        let start = match previous_start.take() {
            None => initial_guess(&disc, eps, opts)?,
            Some(prev) => {
                let mut values = prev.field.values.clone();
                disc.impose_cone(eps, Formulation::Phi, &mut values);
                let sol = Problem::new(&disc, 0.0, eps).solve(&values, opts)?;
                if !sol.converged {
                    return Err(Error::ContinuationStuck { from: 0.0, to: 0.0, eps });
                }
                sol
            }
        };
        previous_start = Some(start.clone());
        let mut current = start;
        for &mu in &config.mu_schedule {
            if mu != current.mu || !current.converged {
                current = advance(&disc, current, mu, opts, &mut inserted)?;
            }
            failures.extend(membership_failures(mesh, &current));
            solutions.push(current.clone());
        }
    }
    let mut result = SweepResult {
        solutions,
        cauchy_deltas: Vec::new(),
        extrapolated: ScalarField::new(mesh.n_u, mesh.n_v, vec![0.0; mesh.len()], 1.0, 0.0),
        membership_failures: failures,
        inserted_steps: inserted,
    };
    let finals: Vec<Solution> = result.finals().into_iter().cloned().collect();
    result.cauchy_deltas = finals.windows(2).map(|w| w[0].field.sup_distance(&w[1].field)).collect();
    result.extrapolated = match finals.as_slice() {
        [.., prev, last] => {
            let ratio = prev.eps / last.eps;
            let values = last
                .field
                .values
                .iter()
                .zip(&prev.field.values)
                .map(|(l, p)| (ratio * l - p) / (ratio - 1.0))
                .collect();
            ScalarField::new(mesh.n_u, mesh.n_v, values, last.mu, 0.0)
        }
        [only] => only.field.clone(),
        [] => unreachable!("schedules are nonempty"),
    };
    Ok(result)
}
