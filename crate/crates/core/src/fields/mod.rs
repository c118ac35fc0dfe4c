//! Pointwise physics kernels.
//!
//! Every kernel takes plain `(value, gradient, Hessian, ξ)` data so the same
//! code serves manufactured-solution checks and the discrete solver.

mod exact;
mod state;
mod transforms;

pub use exact::{
    classify_eta, default_sub_family, default_super_family, envelope, linear_exact, psi_lift,
    spherical_normal_derivative, EtaClass, Envelope, LinearState,
};
pub use state::{
    boundary_linearization, boundary_residual, characteristic_form, derived_state, grad_l2,
    interior_linearization, interior_residual, obliqueness, principal_coefficients, Linearization,
    PrincipalPart, StateDerived,
};
pub use transforms::{
    hat_inverse, hat_rotation, hat_transform, s_interior_linearization, s_interior_residual,
    s_transform, spherical_lift, spherical_unlift, SDirection, SphericalPoint,
};
