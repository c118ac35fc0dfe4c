//! Post-solve checks, exports and the runtime verification suite.

mod checks;
mod export;
pub mod verify;

pub use checks::*;
pub use export::*;

use crate::error::Result;
use crate::fields::{default_sub_family, default_super_family};
use crate::solver::{Discretization, Solution};

/// Default comparison family: sub-solutions followed by super-solutions.
pub fn default_family(disc: &Discretization, eps: f64) -> Result<Vec<[f64; 3]>> {
    let mut family = default_sub_family(&disc.domain, eps)?;
    family.extend(default_super_family(&disc.domain, eps)?);
    Ok(family)
}

/// All five checks on one solution, in a fixed order.
pub fn run_checks(solution: &Solution, disc: &Discretization) -> Result<InvariantReport> {
    let family = default_family(disc, solution.eps)?;
    Ok(InvariantReport::new(vec![
        check_ellipticity(solution, disc),
        check_sandwich(solution, disc, &family)?,
        check_corner_gradients(solution, disc),
        check_boundary_max(solution, disc),
        check_grad_l2_identity(solution, disc),
    ]))
}
