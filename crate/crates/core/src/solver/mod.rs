//! Discretization, Newton iteration and continuation.

mod banded;
mod coloring;
mod continuation;
mod discretization;
mod newton;
mod sparse;

pub use banded::{BandedLu, ZeroPivot};
pub use continuation::{continuation_run, membership_failures, MembershipFailure, SweepResult, MAX_HALVINGS};
pub use discretization::{Discretization, Formulation, RowKind};
pub use newton::{initial_guess, newton_solve, Problem, Solution};
pub use sparse::SparseMatrix;
