use crate::error::{Error, Result};
use crate::field::{dot, norm2, Sym2, Vec2};
use crate::fields::Linearization;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SDirection {
    ToS,
    FromS,
}

/// `φ = √(1+|ξ|²) cosh s`.
pub fn s_transform(value: f64, xi: Vec2, direction: SDirection) -> Result<f64> {
    let r = (1.0 + norm2(xi)).sqrt();
    match direction {
        SDirection::ToS => {
            let ratio = value / r;
            if !(ratio > 1.0) {
                return Err(Error::DegenerateValue(format!("phi/sqrt(1+|xi|^2) = {ratio}")));
            }
            Ok(ratio.acosh())
        }
        SDirection::FromS => {
            if !(value > 0.0) {
                return Err(Error::DegenerateValue(format!("s = {value}")));
            }
            Ok(r * value.cosh())
        }
    }
}

struct SParts {
    r: f64,
    n: f64,
    q: Vec2,
    t: f64,
    pxi: f64,
}

fn s_parts(grad: Vec2, hess: Sym2, xi: Vec2) -> SParts {
    let r = 1.0 + norm2(xi);
    let pxi = dot(grad, xi);
    let n = r * (norm2(grad) + pxi * pxi);
    let q = [grad[0] + pxi * xi[0], grad[1] + pxi * xi[1]];
    SParts {
        r,
        n,
        q,
        t: hess.trace() + hess.bilinear(xi, xi),
        pxi,
    }
}

/// Interior equation written for `s`:
/// `(1+n)(Δs + D²s[ξ,ξ]) − μ(1+|ξ|²) D²s[q,q] + 2(1+(1−μ)n) Ds·ξ
///  + (2+(1−μ)n)(1+n)/((1+|ξ|²) tanh s)` with `q = Ds + (Ds·ξ)ξ` and
/// `n = (1+|ξ|²)(|Ds|² + (Ds·ξ)²)`.
pub fn s_interior_residual(mu: f64, s: f64, grad: Vec2, hess: Sym2, xi: Vec2) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::DegenerateValue(format!("s = {s}")));
    }
    let p = s_parts(grad, hess, xi);
    Ok((1.0 + p.n) * p.t - mu * p.r * hess.bilinear(p.q, p.q)
        + 2.0 * (1.0 + (1.0 - mu) * p.n) * p.pxi
        + (2.0 + (1.0 - mu) * p.n) * (1.0 + p.n) / (p.r * s.tanh()))
}

pub fn s_interior_linearization(mu: f64, s: f64, grad: Vec2, hess: Sym2, xi: Vec2) -> Result<Linearization> {
    let value = s_interior_residual(mu, s, grad, hess, xi)?;
    let p = s_parts(grad, hess, xi);
    let m = 1.0 - mu;
    let zero = (2.0 + m * p.n) * (1.0 + p.n);
    let d_zero_dn = (m * (1.0 + p.n) + 2.0 + m * p.n) / (p.r * s.tanh());
    let hq = hess.apply(p.q);
    // (I + ξξᵀ) H q
    let hq_xi = dot(hq, xi);
    let lift_hq = [hq[0] + hq_xi * xi[0], hq[1] + hq_xi * xi[1]];
    let coef_n = p.t + 2.0 * m * p.pxi + d_zero_dn;
    let mut d_grad = [0.0; 2];
    for k in 0..2 {
        let dn = 2.0 * p.r * p.q[k];
        d_grad[k] = coef_n * dn - 2.0 * mu * p.r * lift_hq[k] + 2.0 * (1.0 + m * p.n) * xi[k];
    }
    let sh = s.sinh();
    let a = Sym2::new(
        (1.0 + p.n) * (1.0 + xi[0] * xi[0]) - mu * p.r * p.q[0] * p.q[0],
        (1.0 + p.n) * xi[0] * xi[1] - mu * p.r * p.q[0] * p.q[1],
        (1.0 + p.n) * (1.0 + xi[1] * xi[1]) - mu * p.r * p.q[1] * p.q[1],
    );
    Ok(Linearization {
        value,
        d_phi: -zero / (p.r * sh * sh),
        d_grad,
        d_hess: [a.xx, 2.0 * a.xy, a.yy],
    })
}

/// Polar angles `(θ, ϕ)` of the ray `x = (ξ₁, ξ₂, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalPoint {
    pub theta: f64,
    pub varphi: f64,
}

/// `ψ = φ/|x|`, `θ = arccos(x₁/|x|)`, `ϕ` the polar angle of `(x₂, x₃)`.
pub fn spherical_lift(xi: Vec2, phi: f64) -> (SphericalPoint, f64) {
    let r = (1.0 + norm2(xi)).sqrt();
    let zeta = SphericalPoint {
        theta: (xi[0] / r).clamp(-1.0, 1.0).acos(),
        varphi: 1f64.atan2(xi[1]),
    };
    (zeta, phi / r)
}

pub fn spherical_unlift(zeta: SphericalPoint, psi: f64) -> Result<(Vec2, f64)> {
    let (st, ct) = zeta.theta.sin_cos();
    let (sp, cp) = zeta.varphi.sin_cos();
    let x3 = st * sp;
    if !(x3 > 0.0) {
        return Err(Error::BehindApex(x3));
    }
    Ok(([ct / x3, st * cp / x3], psi / x3))
}

/// Rotation about the `x₂` axis by `σ₂` that carries the wing-face apex ray
/// onto the `x₃` axis.
pub fn hat_rotation(sigma2: f64) -> [[f64; 3]; 3] {
    let (s, c) = sigma2.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

pub fn hat_transform(xi: Vec2, phi: f64, sigma2: f64) -> Result<(Vec2, f64)> {
    let rot = hat_rotation(sigma2);
    let x = [xi[0], xi[1], 1.0];
    let xh: Vec<f64> = rot.iter().map(|row| row[0] * x[0] + row[1] * x[1] + row[2] * x[2]).collect();
    if !(xh[2] > 0.0) {
        return Err(Error::BehindApex(xh[2]));
    }
    Ok(([xh[0] / xh[2], xh[1] / xh[2]], phi / xh[2]))
}

pub fn hat_inverse(xi_hat: Vec2, phi_hat: f64, sigma2: f64) -> Result<(Vec2, f64)> {
    let rot = hat_rotation(sigma2);
    let xh = [xi_hat[0], xi_hat[1], 1.0];
    let x: Vec<f64> = (0..3).map(|k| (0..3).map(|m| rot[m][k] * xh[m]).sum()).collect();
    if !(x[2] > 0.0) {
        return Err(Error::BehindApex(x[2]));
    }
    Ok(([x[0] / x[2], x[1] / x[2]], phi_hat / x[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{interior_residual, linear_exact};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    #[test]
    fn s_transform_examples() {
        let xi = [-1.0, 0.0];
        let phi = 2f64.sqrt() * 0.3f64.cosh();
        assert!((s_transform(phi, xi, SDirection::ToS).unwrap() - 0.3).abs() < 1e-14);
        let phi = 1.05 * 2f64.sqrt();
        let s = s_transform(phi, xi, SDirection::ToS).unwrap();
        assert!((s - 0.314_924_756_603_847_9).abs() < 1e-14);
        assert!(matches!(
            s_transform(2f64.sqrt(), xi, SDirection::ToS),
            Err(Error::DegenerateValue(_))
        ));
    }

    #[test]
    fn constant_s_residual() {
        for s0 in [0.1, 0.5, 2.0] {
            let r = s_interior_residual(1.0, s0, [0.0, 0.0], Sym2::ZERO, [-1.0, 0.0]).unwrap();
            assert!((r - 1.0 / s0.tanh()).abs() < 1e-14);
        }
        assert!(s_interior_residual(1.0, 0.0, [0.0, 0.0], Sym2::ZERO, [-1.0, 0.0]).is_err());
    }

    /// `φ = f cosh s` with `f = √(1+|ξ|²)`, differentiated by the chain rule.
    fn phi_from_s(s: f64, ds: Vec2, d2s: Sym2, xi: Vec2) -> (f64, Vec2, Sym2) {
        let f = (1.0 + norm2(xi)).sqrt();
        let (sh, ch) = (s.sinh(), s.cosh());
        let df = [xi[0] / f, xi[1] / f];
        let f3 = f * f * f;
        let d2f = Sym2::new(1.0 / f - xi[0] * xi[0] / f3, -xi[0] * xi[1] / f3, 1.0 / f - xi[1] * xi[1] / f3);
        let phi = f * ch;
        let grad = [df[0] * ch + f * sh * ds[0], df[1] * ch + f * sh * ds[1]];
        let entry = |a: usize, b: usize, f2: f64, s2: f64| {
            f2 * ch + sh * (df[a] * ds[b] + df[b] * ds[a]) + f * ch * ds[a] * ds[b] + f * sh * s2
        };
        let hess = Sym2::new(
            entry(0, 0, d2f.xx, d2s.xx),
            entry(0, 1, d2f.xy, d2s.xy),
            entry(1, 1, d2f.yy, d2s.yy),
        );
        (phi, grad, hess)
    }

    #[test]
    fn s_form_is_a_rescaling_of_the_phi_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let mu = rng.gen_range(0.0..=1.0);
            let s = rng.gen_range(0.05..2.0);
            let ds = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let d2s = Sym2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let xi = [rng.gen_range(-1.7..0.0), rng.gen_range(0.0..1.7)];
            let (phi, grad, hess) = phi_from_s(s, ds, d2s, xi);
            let g = interior_residual(mu, phi, grad, hess, xi);
            let r = s_interior_residual(mu, s, ds, d2s, xi).unwrap();
            let scale = (1.0 + norm2(xi)).sqrt() * s.sinh().powi(3);
            let size = (scale * r).abs().max(g.abs()).max(1.0);
            assert!((g - scale * r).abs() <= 1e-9 * size, "{g} vs {}", scale * r);
        }
    }

    #[test]
    fn s_linearization_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = 1e-6;
        for _ in 0..50 {
            let mu = rng.gen_range(0.0..1.0);
            let s = rng.gen_range(0.1..1.5);
            let g = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let xi = [rng.gen_range(-1.5..0.0), rng.gen_range(0.0..1.5)];
            let hs = Sym2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let lin = s_interior_linearization(mu, s, g, hs, xi).unwrap();
            let f = |s: f64, g: Vec2, hs: Sym2| s_interior_residual(mu, s, g, hs, xi).unwrap();
            let close = |a: f64, b: f64| (a - b).abs() < 1e-5 * (1.0 + b.abs());
            assert!(close(lin.d_phi, (f(s + h, g, hs) - f(s - h, g, hs)) / (2.0 * h)));
            for k in 0..2 {
                let (mut gp, mut gm) = (g, g);
                gp[k] += h;
                gm[k] -= h;
                assert!(close(lin.d_grad[k], (f(s, gp, hs) - f(s, gm, hs)) / (2.0 * h)));
            }
            let bump = |d: f64, k: usize| {
                let mut e = [hs.xx, hs.xy, hs.yy];
                e[k] += d;
                Sym2::new(e[0], e[1], e[2])
            };
            for k in 0..3 {
                let fd = (f(s, g, bump(h, k)) - f(s, g, bump(-h, k))) / (2.0 * h);
                assert!(close(lin.d_hess[k], fd));
            }
        }
    }

    #[test]
    fn zero_order_term_is_nonincreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let mu = rng.gen_range(0.0..=1.0);
            let g = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let xi = [rng.gen_range(-2.0..0.0), rng.gen_range(0.0..2.0)];
            let hs = Sym2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let s1 = rng.gen_range(0.01..3.0);
            let s2 = s1 + rng.gen_range(0.0..2.0);
            let r1 = s_interior_residual(mu, s1, g, hs, xi).unwrap();
            let r2 = s_interior_residual(mu, s2, g, hs, xi).unwrap();
            assert!(r2 <= r1 + 1e-14 * r1.abs().max(1.0));
        }
    }

    #[test]
    fn spherical_examples() {
        let r = 3f64.sqrt();
        let (_, psi) = spherical_lift([-r * 0.3f64.cos(), r * 0.3f64.sin()], 2.0);
        assert!((psi - 1.0).abs() < 1e-15);
        let (zeta, psi) = spherical_lift([0.0, 0.0], 1.3);
        assert_eq!(psi, 1.3);
        assert!((zeta.theta - FRAC_PI_2).abs() < 1e-15);
        assert!((zeta.varphi - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn hat_examples() {
        let s2 = FRAC_PI_6;
        let (xh, _) = hat_transform([-s2.tan(), 0.0], 2.0, s2).unwrap();
        assert!(xh[0].abs() < 1e-15 && xh[1].abs() < 1e-15);
        let (xh, ph) = hat_transform([-0.4, 0.7], 1.9, 0.0).unwrap();
        assert_eq!((xh, ph), ([-0.4, 0.7], 1.9));
        assert!(matches!(hat_transform([3.0, 0.0], 1.0, s2), Err(Error::BehindApex(_))));
    }

    #[test]
    fn rotated_linear_solutions_stay_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let s2 = 0.4;
        let rot = hat_rotation(s2);
        for _ in 0..50 {
            let eta = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(1.5..3.0)];
            let eta_hat: Vec<f64> = rot.iter().map(|row| (0..3).map(|k| row[k] * eta[k]).sum()).collect();
            let eta_hat = [eta_hat[0], eta_hat[1], eta_hat[2]];
            let xi = [rng.gen_range(-1.0..0.0), rng.gen_range(0.0..1.0)];
            let phi = linear_exact(eta, xi).unwrap().phi;
            let (xh, ph) = hat_transform(xi, phi, s2).unwrap();
            let lin = linear_exact(eta_hat, xh).unwrap();
            assert!((lin.phi - ph).abs() < 1e-13 * ph.abs().max(1.0));
            assert_eq!(interior_residual(1.0, lin.phi, lin.grad, Sym2::ZERO, xh), 0.0);
        }
    }

    proptest! {
        #[test]
        fn s_round_trip(x1 in -2.0f64..0.0, x2 in 0.0f64..2.0, s in 0.01f64..3.0) {
            let xi = [x1, x2];
            let phi = s_transform(s, xi, SDirection::FromS).unwrap();
            let back = s_transform(phi, xi, SDirection::ToS).unwrap();
            prop_assert!((back - s).abs() <= 1e-13 * s.max(1.0) / s.tanh().min(1.0));
            let phi2 = s_transform(back, xi, SDirection::FromS).unwrap();
            prop_assert!((phi2 - phi).abs() <= 1e-13 * phi);
        }

        #[test]
        fn spherical_round_trip(x1 in -2.0f64..2.0, x2 in -2.0f64..2.0, phi in -5.0f64..5.0) {
            let (zeta, psi) = spherical_lift([x1, x2], phi);
            let (xi, back) = spherical_unlift(zeta, psi).unwrap();
            prop_assert!((xi[0] - x1).abs() < 1e-13 && (xi[1] - x2).abs() < 1e-13);
            prop_assert!((back - phi).abs() < 1e-13 * phi.abs().max(1.0));
        }

        #[test]
        fn hat_round_trip(x1 in -1.5f64..0.0, x2 in 0.0f64..1.5, phi in 0.5f64..4.0, s2 in 0.0f64..0.6) {
            let (xh, ph) = hat_transform([x1, x2], phi, s2).unwrap();
            let (xi, back) = hat_inverse(xh, ph, s2).unwrap();
            prop_assert!((xi[0] - x1).abs() < 1e-13 && (xi[1] - x2).abs() < 1e-13);
            prop_assert!((back - phi).abs() < 1e-13 * phi);
        }
    }
}
