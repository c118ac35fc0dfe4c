//! Self-similar supersonic Chaplygin-gas flow past a conical wing with
//! diamond cross sections and a shock detached from the leading edges.
//!
//! The three-dimensional potential flow reduces, in conical coordinates
//! `ξ = (x₁/x₃, x₂/x₃)`, to an oblique-derivative problem for a degenerate
//! elliptic equation on the quarter region bounded by the Mach circle, the
//! wing face and the two symmetry planes. This crate builds that region,
//! evaluates the pointwise equation kernels, and computes the solution by
//! damped Newton continuation in the nonlinearity parameter `μ` combined with
//! a vanishing-viscosity sweep in the Dirichlet lift `ε`.
//!
//! Module map:
//!
//! * [`geometry`]: wing, Mach cone, domain and boundary-fitted mesh.
//! * [`fields`]: residual kernels, derived state, exact linear solutions,
//!   sub/super-solution envelopes and coordinate transforms.
//! * [`solver`]: discretization, Jacobians, Newton and continuation.
//! * [`diagnostics`]: verification checks, solver-free suite and exports.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod fields;
pub mod geometry;
pub mod solver;

pub use config::{GridSpec, JacobianMode, NewtonOptions, ProblemConfig};
pub use error::{Error, Result};
pub use field::{ScalarField, Sym2, Vec2};
pub use geometry::{build_domain, build_mesh, critical_angle, Domain, Mesh, NodeTag, Side};
pub use solver::{continuation_run, Discretization, Solution, SweepResult};
