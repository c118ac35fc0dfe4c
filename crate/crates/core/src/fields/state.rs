use crate::error::{Error, Result};
use crate::field::{dot, norm2, Sym2, Vec2};
use crate::geometry::{Domain, Side};

/// Flow quantities derived from `(φ, Dφ)` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDerived {
    /// `χ = φ − Dφ·ξ`, the axial velocity component.
    pub chi: f64,
    /// `c² = |Dφ|² + χ² − 1`.
    pub c2: f64,
    /// Pseudo-Mach number squared; `None` when `c² ≤ 0`.
    pub l2: Option<f64>,
    /// Density `√A / c`; `None` when `c² ≤ 0`.
    pub rho: Option<f64>,
    /// Set when `c² ≤ 0`. Not an error: callers decide.
    pub subsonic: bool,
}

impl StateDerived {
    /// Chaplygin pressure `A (1/ρ* − 1/ρ)`; needs a reference density.
    pub fn pressure(&self, a: f64, rho_star: f64) -> Option<f64> {
        self.rho.map(|rho| a * (1.0 / rho_star - 1.0 / rho))
    }
}

pub fn derived_state(phi: f64, grad: Vec2, xi: Vec2, a: f64) -> StateDerived {
    let chi = phi - dot(grad, xi);
    let speed2 = norm2(grad) + chi * chi;
    let c2 = speed2 - 1.0;
    if c2 > 0.0 {
        let l2 = 1.0 + (1.0 - phi * phi / (1.0 + norm2(xi))) / c2;
        StateDerived {
            chi,
            c2,
            l2: Some(l2),
            rho: Some(a.sqrt() / c2.sqrt()),
            subsonic: false,
        }
    } else {
        StateDerived {
            chi,
            c2,
            l2: None,
            rho: None,
            subsonic: true,
        }
    }
}

#[inline]
fn chi_c2_w(phi: f64, grad: Vec2, xi: Vec2) -> (f64, f64, Vec2) {
    let chi = phi - dot(grad, xi);
    let c2 = norm2(grad) + chi * chi - 1.0;
    let w = [grad[0] - chi * xi[0], grad[1] - chi * xi[1]];
    (chi, c2, w)
}

/// `c²(Δφ + D²φ[ξ,ξ]) − μ D²φ[w, w]` with `w = Dφ − χξ`.
pub fn interior_residual(mu: f64, phi: f64, grad: Vec2, hess: Sym2, xi: Vec2) -> f64 {
    let (_, c2, w) = chi_c2_w(phi, grad, xi);
    c2 * (hess.trace() + hess.bilinear(xi, xi)) - mu * hess.bilinear(w, w)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrincipalPart {
    pub a: Sym2,
    /// Ascending.
    pub eigenvalues: [f64; 2],
}

/// Coefficients `a_ij` with `Σ a_ij ∂_ij φ` equal to the second-order part of
/// the interior equation: `a = c²(I + ξξᵀ) − μ wwᵀ`.
pub fn principal_coefficients(mu: f64, phi: f64, grad: Vec2, xi: Vec2) -> PrincipalPart {
    let (_, c2, w) = chi_c2_w(phi, grad, xi);
    let a = Sym2::new(
        c2 * (1.0 + xi[0] * xi[0]) - mu * w[0] * w[0],
        c2 * xi[0] * xi[1] - mu * w[0] * w[1],
        c2 * (1.0 + xi[1] * xi[1]) - mu * w[1] * w[1],
    );
    PrincipalPart {
        a,
        eigenvalues: a.eigenvalues(),
    }
}

/// Residual value and its partial derivatives with respect to the nodal
/// value, the gradient and the Hessian entries `(h11, h12, h22)`. The `h12`
/// partial already counts both off-diagonal positions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Linearization {
    pub value: f64,
    pub d_phi: f64,
    pub d_grad: Vec2,
    pub d_hess: [f64; 3],
}

pub fn interior_linearization(mu: f64, phi: f64, grad: Vec2, hess: Sym2, xi: Vec2) -> Linearization {
    let (chi, c2, w) = chi_c2_w(phi, grad, xi);
    let s = hess.trace() + hess.bilinear(xi, xi);
    let hw = hess.apply(w);
    let hw_xi = dot(hw, xi);
    let a = principal_coefficients(mu, phi, grad, xi).a;
    Linearization {
        value: c2 * s - mu * hess.bilinear(w, w),
        d_phi: 2.0 * chi * s + 2.0 * mu * hw_xi,
        d_grad: [
            2.0 * w[0] * s - 2.0 * mu * (hw[0] + xi[0] * hw_xi),
            2.0 * w[1] * s - 2.0 * mu * (hw[1] + xi[1] * hw_xi),
        ],
        d_hess: [a.xx, 2.0 * a.xy, a.yy],
    }
}

/// Boundary condition residual on one side. The cone row is the lifted
/// Dirichlet condition `φ − √(1+|ξ|²) − ε`; the wing face carries the oblique
/// condition `Dφ·ν_py + χ tan σ₂`; the symmetry planes `Dφ·ν`.
pub fn boundary_residual(
    side: Side,
    eps: f64,
    phi: f64,
    grad: Vec2,
    xi: Vec2,
    domain: &Domain,
) -> Result<f64> {
    let defect = domain.side_defect(side, xi);
    if defect.abs() > 1e-10 {
        return Err(Error::PointOffBoundary {
            side: side.name(),
            point: xi,
            distance: defect,
        });
    }
    if side == Side::Cone {
        return Ok(phi - (1.0 + norm2(xi)).sqrt() - eps);
    }
    Ok(boundary_linearization(side, phi, grad, xi, domain).value)
}

/// Value and partials of the Neumann/oblique rows, which are linear in
/// `(φ, Dφ)`. The cone side has no derivative row and returns zeros.
pub fn boundary_linearization(side: Side, phi: f64, grad: Vec2, xi: Vec2, domain: &Domain) -> Linearization {
    match side {
        Side::Cone => Linearization::default(),
        Side::Py => {
            let t = domain.tan_sigma2();
            let nu = domain.nu_py;
            let chi = phi - dot(grad, xi);
            Linearization {
                value: dot(grad, nu) + chi * t,
                d_phi: t,
                d_grad: [nu[0] - t * xi[0], nu[1] - t * xi[1]],
                d_hess: [0.0; 3],
            }
        }
        Side::Sy1 | Side::Sy2 => {
            let nu = domain.exterior_normal(side);
            Linearization {
                value: dot(grad, nu),
                d_phi: 0.0,
                d_grad: nu,
                d_hess: [0.0; 3],
            }
        }
    }
}

/// `(ν_py − tan σ₂ ξ)·ν_py` on the wing face, which is the constant
/// `|ν_py|² + tan²σ₂`.
pub fn obliqueness(domain: &Domain) -> f64 {
    norm2(domain.nu_py) + domain.tan_sigma2().powi(2)
}

/// Gradient of the pseudo-Mach number squared,
/// `D(L²) = (Dc²/c²)(1 − L²) − [(1+|ξ|²) D(φ²) − φ² D|ξ|²] / [(1+|ξ|²)² c²]`.
pub fn grad_l2(phi: f64, grad: Vec2, hess: Sym2, xi: Vec2) -> Result<Vec2> {
    let (_, c2, w) = chi_c2_w(phi, grad, xi);
    if !(c2 > 0.0) {
        return Err(Error::SubsonicState(c2));
    }
    let r = 1.0 + norm2(xi);
    let l2 = 1.0 + (1.0 - phi * phi / r) / c2;
    // D(|Dφ|² + χ²) = 2 D²φ (Dφ − χξ)
    let hw = hess.apply(w);
    let mut out = [0.0; 2];
    for k in 0..2 {
        let dc2 = 2.0 * hw[k];
        let dphi2 = 2.0 * phi * grad[k];
        let dxi2 = 2.0 * xi[k];
        out[k] = dc2 / c2 * (1.0 - l2) - (r * dphi2 - phi * phi * dxi2) / (r * r * c2);
    }
    Ok(out)
}

/// Characteristic form `Q(κ) = c² − |∇Φ·κ|²` of the three-dimensional
/// potential equation, with `c² = |∇Φ|² − 1`.
pub fn characteristic_form(kappa: [f64; 3], grad_phi: [f64; 3]) -> Result<f64> {
    let norm = (kappa[0] * kappa[0] + kappa[1] * kappa[1] + kappa[2] * kappa[2]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnit(norm));
    }
    let speed2: f64 = grad_phi.iter().map(|g| g * g).sum();
    let along: f64 = kappa.iter().zip(&grad_phi).map(|(k, g)| k * g).sum();
    Ok(speed2 - 1.0 - along * along)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProblemConfig;
    use crate::geometry::build_domain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_6;

    #[test]
    fn freestream_state() {
        let s = derived_state(2.0, [0.0, 0.0], [-1.0, 0.0], 1.0);
        assert_eq!(s.chi, 2.0);
        assert_eq!(s.c2, 3.0);
        assert!((s.l2.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.rho.unwrap() - 0.5773502691896258).abs() < 1e-15);
        assert!(!s.subsonic);
        assert!((s.pressure(1.0, 0.5).unwrap() - (2.0 - 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn mach_circle_is_parabolic() {
        let r = 3f64.sqrt();
        for angle in [0.1f64, 0.8, 1.4] {
            let xi = [-r * angle.cos(), r * angle.sin()];
            let s = derived_state(2.0, [0.0, 0.0], xi, 1.0);
            assert!((s.l2.unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sonic_state_is_flagged() {
        let s = derived_state(1.0, [0.0, 0.0], [0.0, 0.0], 1.0);
        assert_eq!(s.chi, 1.0);
        assert_eq!(s.c2, 0.0);
        assert!(s.subsonic && s.l2.is_none() && s.rho.is_none());
    }

    #[test]
    fn chaplygin_identity_rho_c() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let phi = rng.gen_range(1.0..4.0);
            let grad = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let xi = [rng.gen_range(-1.5..0.0), rng.gen_range(0.0..1.5)];
            let a = rng.gen_range(0.1..5.0);
            let s = derived_state(phi, grad, xi, a);
            if let Some(rho) = s.rho {
                assert!((rho * s.c2.sqrt() - a.sqrt()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn residual_of_paraboloid() {
        // φ = ξ₁² + ξ₂² at ξ = (−1, 0): Dφ = (−2, 0), χ = −1, c² = 4.
        let (phi, grad, hess, xi) = (1.0, [-2.0, 0.0], Sym2::new(2.0, 0.0, 2.0), [-1.0, 0.0]);
        assert_eq!(interior_residual(0.0, phi, grad, hess, xi), 24.0);
        assert_eq!(interior_residual(1.0, phi, grad, hess, xi), 6.0);
    }

    #[test]
    fn linear_fields_are_annihilated() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let grad = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let xi = [rng.gen_range(-2.0..0.0), rng.gen_range(0.0..2.0)];
            let phi = rng.gen_range(-3.0..3.0);
            for mu in [0.0, 0.5, 1.0] {
                assert_eq!(interior_residual(mu, phi, grad, Sym2::ZERO, xi), 0.0);
            }
        }
    }

    #[test]
    fn principal_coefficient_examples() {
        let p = principal_coefficients(0.0, 2.0, [0.0, 0.0], [-1.0, 0.0]);
        assert_eq!(p.a, Sym2::new(6.0, 0.0, 3.0));
        assert_eq!(p.eigenvalues, [3.0, 6.0]);
        let p = principal_coefficients(1.0, 2.0, [0.0, 0.0], [-1.0, 0.0]);
        assert_eq!(p.a, Sym2::new(2.0, 0.0, 3.0));
        assert!(p.eigenvalues[0] > 0.0);
        let p = principal_coefficients(1.0, 2.0, [0.0, 0.0], [-3f64.sqrt(), 0.0]);
        assert!(p.eigenvalues[0].abs() < 1e-14);
    }

    #[test]
    fn principal_part_reproduces_second_order_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let mu = rng.gen_range(0.0..1.0);
            let phi = rng.gen_range(-3.0..3.0);
            let grad = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let xi = [rng.gen_range(-2.0..0.5), rng.gen_range(-0.5..2.0)];
            let hess = Sym2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let direct = interior_residual(mu, phi, grad, hess, xi);
            let via_a = principal_coefficients(mu, phi, grad, xi).a.contract(&hess);
            assert!((direct - via_a).abs() <= 1e-13 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn ellipticity_tracks_pseudo_mach_number() {
        // det a = c⁴ (1+|ξ|²)(1 − L²) at μ = 1
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        while checked < 200 {
            let phi = rng.gen_range(0.5..4.0);
            let grad = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let xi = [rng.gen_range(-1.8..0.0), rng.gen_range(0.0..1.8)];
            let s = derived_state(phi, grad, xi, 1.0);
            let Some(l2) = s.l2 else { continue };
            let p = principal_coefficients(1.0, phi, grad, xi);
            let det = p.a.xx * p.a.yy - p.a.xy * p.a.xy;
            let expect = s.c2 * s.c2 * (1.0 + norm2(xi)) * (1.0 - l2);
            assert!((det - expect).abs() <= 1e-10 * expect.abs().max(1.0));
            assert_eq!(p.eigenvalues[0] > 0.0, l2 < 1.0, "l2 = {l2}");
            checked += 1;
        }
    }

    #[test]
    fn linearization_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = 1e-6;
        for _ in 0..50 {
            let mu = rng.gen_range(0.0..1.0);
            let phi = rng.gen_range(1.0..3.0);
            let grad = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let xi = [rng.gen_range(-1.5..0.0), rng.gen_range(0.0..1.5)];
            let hess = Sym2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let lin = interior_linearization(mu, phi, grad, hess, xi);
            let f = |p: f64, g: Vec2, hs: Sym2| interior_residual(mu, p, g, hs, xi);
            let fd_phi = (f(phi + h, grad, hess) - f(phi - h, grad, hess)) / (2.0 * h);
            assert!((lin.d_phi - fd_phi).abs() < 1e-6 * (1.0 + fd_phi.abs()));
            for k in 0..2 {
                let (mut gp, mut gm) = (grad, grad);
                gp[k] += h;
                gm[k] -= h;
                let fd = (f(phi, gp, hess) - f(phi, gm, hess)) / (2.0 * h);
                assert!((lin.d_grad[k] - fd).abs() < 1e-6 * (1.0 + fd.abs()));
            }
            let bump = |d: [f64; 3]| Sym2::new(hess.xx + d[0], hess.xy + d[1], hess.yy + d[2]);
            for k in 0..3 {
                let mut e = [0.0; 3];
                e[k] = h;
                let fd = (f(phi, grad, bump(e)) - f(phi, grad, bump(e.map(|x| -x)))) / (2.0 * h);
                assert!((lin.d_hess[k] - fd).abs() < 1e-6 * (1.0 + fd.abs()));
            }
        }
    }

    fn domain(s1: f64, s2: f64) -> Domain {
        build_domain(&ProblemConfig {
            sigma1: s1,
            sigma2: s2,
            ..ProblemConfig::standard()
        })
        .unwrap()
    }

    #[test]
    fn boundary_residual_examples() {
        let d = domain(FRAC_PI_6, FRAC_PI_6);
        let r = boundary_residual(Side::Cone, 0.05, 2.05, [0.0, 0.0], [-3f64.sqrt(), 0.0], &d).unwrap();
        assert!(r.abs() < 1e-15);
        let r = boundary_residual(Side::Py, 0.0, 2.0, [0.0, 0.0], d.p3, &d).unwrap();
        assert!((r - 1.1547005383792515).abs() < 1e-15);
        let r = boundary_residual(Side::Sy2, 0.0, 2.0, [0.3, -0.7], [-1.0, 0.0], &d).unwrap();
        assert!((r - 0.7).abs() < 1e-15);
        let err = boundary_residual(Side::Sy1, 0.0, 2.0, [0.0, 0.0], [-0.1, 1.0], &d).unwrap_err();
        assert!(matches!(err, Error::PointOffBoundary { .. }));
    }

    #[test]
    fn oblique_condition_forms_agree_on_the_wing_face() {
        let d = domain(FRAC_PI_6, FRAC_PI_6);
        let t = d.tan_sigma2();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let phi = rng.gen_range(-3.0..3.0);
            let grad = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let xi = d.p3;
            let first = boundary_residual(Side::Py, 0.0, phi, grad, xi, &d).unwrap();
            let rewritten = dot(grad, [d.nu_py[0] - t * xi[0], d.nu_py[1] - t * xi[1]]) + phi * t;
            assert!((first - rewritten).abs() < 1e-14);
        }
    }

    #[test]
    fn obliqueness_values() {
        assert!((obliqueness(&domain(FRAC_PI_6, FRAC_PI_6)) - 7.0 / 3.0).abs() < 1e-14);
        let d = domain(FRAC_PI_6, std::f64::consts::FRAC_PI_4);
        assert!((obliqueness(&d) - 5.0).abs() < 1e-14);
        let t = d.tan_sigma2();
        for k in 0..20 {
            let xi = d.boundary_point(Side::Py, k as f64 / 19.0).unwrap();
            let direction = [d.nu_py[0] - t * xi[0], d.nu_py[1] - t * xi[1]];
            assert!((dot(direction, d.nu_py) - obliqueness(&d)).abs() < 1e-13);
        }
    }

    #[test]
    fn grad_l2_closed_forms() {
        let g = grad_l2(2.0, [0.0, 0.0], Sym2::ZERO, [-1.0, 0.0]).unwrap();
        assert!((g[0] + 2.0 / 3.0).abs() < 1e-15 && g[1] == 0.0);
        // parabolic point with Dφ = 0: D(L²) = 2ξ / ((1+|ξ|²) c²)
        let xi = [-0.8, 0.0];
        let phi = (1.0 + 0.64f64).sqrt();
        let g = grad_l2(phi, [0.0, 0.0], Sym2::new(0.3, 0.1, -0.2), xi).unwrap();
        let c2 = phi * phi - 1.0;
        assert!((g[0] - 2.0 * xi[0] / ((1.64) * c2)).abs() < 1e-14);
        assert!(g[0] < 0.0);
        assert!(matches!(
            grad_l2(1.0, [0.0, 0.0], Sym2::ZERO, [0.0, 0.0]),
            Err(Error::SubsonicState(_))
        ));
    }

    #[test]
    fn characteristic_form_examples() {
        assert_eq!(characteristic_form([0.0, 0.0, 1.0], [0.0, 0.0, 2.0]).unwrap(), -1.0);
        assert_eq!(characteristic_form([1.0, 0.0, 0.0], [0.0, 0.0, 2.0]).unwrap(), 3.0);
        assert!(matches!(
            characteristic_form([1.0, 1.0, 0.0], [0.0, 0.0, 2.0]),
            Err(Error::NotUnit(_))
        ));
    }
}
