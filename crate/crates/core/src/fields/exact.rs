use crate::error::{Error, Result};
use crate::field::{norm2, ScalarField, Vec2};
use crate::geometry::{transfinite_point, Domain, Mesh, Side};

/// Value, gradient, `χ` and `c²` of a linear exact solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearState {
    pub phi: f64,
    pub grad: Vec2,
    pub chi: f64,
    pub c2: f64,
}

fn norm3_sq(eta: [f64; 3]) -> f64 {
    eta.iter().map(|e| e * e).sum()
}

/// `φ = η₁ξ₁ + η₂ξ₂ + η₃`, which solves the interior equation for every `μ`.
pub fn linear_exact(eta: [f64; 3], xi: Vec2) -> Result<LinearState> {
    let n2 = norm3_sq(eta);
    if !(n2 > 1.0) {
        return Err(Error::InadmissibleEta(n2));
    }
    Ok(LinearState {
        phi: eta[0] * xi[0] + eta[1] * xi[1] + eta[2],
        grad: [eta[0], eta[1]],
        chi: eta[2],
        c2: n2 - 1.0,
    })
}

/// Amount by which the lifted cone condition raises `ψ = φ/√(1+|ξ|²)` above 1.
///
/// On the Mach arc `1 + |ξ|² = v²`, so `φ = √(1+|ξ|²) + ε` reads `ψ = 1 + ε/v`.
pub fn psi_lift(domain: &Domain, eps: f64) -> f64 {
    eps / domain.v3inf
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaClass {
    Super,
    Sub,
    Neither,
}

fn unit_ray(xi: Vec2) -> [f64; 3] {
    let r = (1.0 + norm2(xi)).sqrt();
    [xi[0] / r, xi[1] / r, 1.0 / r]
}

fn psi_eta(eta: [f64; 3], xi: Vec2) -> f64 {
    let x = unit_ray(xi);
    eta[0] * x[0] + eta[1] * x[1] + eta[2] * x[2]
}

/// Outward unit normal of the plane through the apex containing a flat side.
fn plane_normal(domain: &Domain, side: Side) -> [f64; 3] {
    match side {
        Side::Sy1 => [1.0, 0.0, 0.0],
        Side::Sy2 => [0.0, -1.0, 0.0],
        _ => {
            let n = [domain.nu_py[0], domain.nu_py[1], domain.tan_sigma2()];
            let len = norm3_sq(n).sqrt();
            n.map(|c| c / len)
        }
    }
}

/// Derivative of `ψ^η = η·x/|x|` along the unit sphere in the direction of
/// the outward normal of a flat side, at the ray through `ξ`.
pub fn spherical_normal_derivative(eta: [f64; 3], domain: &Domain, side: Side, xi: Vec2) -> f64 {
    let n = plane_normal(domain, side);
    let x = unit_ray(xi);
    let eta_n: f64 = (0..3).map(|k| eta[k] * n[k]).sum();
    let eta_x: f64 = (0..3).map(|k| eta[k] * x[k]).sum();
    let x_n: f64 = (0..3).map(|k| x[k] * n[k]).sum();
    eta_n - eta_x * x_n
}

/// Sorts `η` into the super-solution set, the sub-solution set, or neither,
/// by sampling the inequalities on each boundary piece.
pub fn classify_eta(eta: [f64; 3], domain: &Domain, eps: f64, n_samples: usize) -> Result<EtaClass> {
    let n2 = norm3_sq(eta);
    if !(n2 > 1.0) {
        return Err(Error::InadmissibleEta(n2));
    }
    if n_samples < 16 {
        return Err(Error::Precondition(format!("n_samples = {n_samples} < 16")));
    }
    let level = 1.0 + psi_lift(domain, eps);
    let params = (0..n_samples).map(|k| k as f64 / (n_samples - 1) as f64);
    let (mut sup, mut sub) = (true, true);
    for t in params {
        let xi = domain.boundary_point(Side::Cone, t)?;
        let psi = psi_eta(eta, xi);
        sup &= psi > level;
        sub &= psi < level;
        for side in [Side::Py, Side::Sy1, Side::Sy2] {
            let xi = domain.boundary_point(side, t)?;
            let d = spherical_normal_derivative(eta, domain, side, xi);
            sup &= d > 0.0;
            sub &= d < 0.0;
        }
        if !sup && !sub {
            return Ok(EtaClass::Neither);
        }
    }
    Ok(if sup {
        EtaClass::Super
    } else {
        EtaClass::Sub
    })
}

/// Lower and upper comparison envelopes on a mesh.
#[derive(Clone, Debug)]
pub struct Envelope {
    pub lower: ScalarField,
    pub upper: ScalarField,
    /// Smallest `lower/√(1+|ξ|²) − (1 + ε/v)` over nodes at mapped distance
    /// at least [`Envelope::BAND`] from the Mach arc.
    pub delta0: f64,
    pub n_sub: usize,
    pub n_super: usize,
}

impl Envelope {
    pub const BAND: f64 = 0.1;
    const SAMPLES: usize = 129;
}

/// Pointwise maximum of the sub-solutions and minimum of the super-solutions
/// in the family, both scaled back to `φ`.
pub fn envelope(domain: &Domain, eps: f64, eta_family: &[[f64; 3]], mesh: &Mesh) -> Result<Envelope> {
    let mut subs = Vec::new();
    let mut supers = Vec::new();
    for &eta in eta_family {
        match classify_eta(eta, domain, eps, Envelope::SAMPLES)? {
            EtaClass::Sub => subs.push(eta),
            EtaClass::Super => supers.push(eta),
            EtaClass::Neither => {}
        }
    }
    if subs.is_empty() {
        return Err(Error::EmptyFamily("sub"));
    }
    if supers.is_empty() {
        return Err(Error::EmptyFamily("super"));
    }
    let level = 1.0 + psi_lift(domain, eps);
    let mut lower = Vec::with_capacity(mesh.len());
    let mut upper = Vec::with_capacity(mesh.len());
    let mut delta0 = f64::INFINITY;
    for (k, &xi) in mesh.nodes.iter().enumerate() {
        let lo = subs.iter().map(|&e| psi_eta(e, xi)).fold(f64::NEG_INFINITY, f64::max);
        let hi = supers.iter().map(|&e| psi_eta(e, xi)).fold(f64::INFINITY, f64::min);
        if mesh.mapped_distance_to_cone(k) >= Envelope::BAND - 1e-12 {
            delta0 = delta0.min(lo - level);
        }
        let r = (1.0 + norm2(xi)).sqrt();
        lower.push(r * lo);
        upper.push(r * hi);
    }
    Ok(Envelope {
        lower: ScalarField::new(mesh.n_u, mesh.n_v, lower, 1.0, eps),
        upper: ScalarField::new(mesh.n_u, mesh.n_v, upper, 1.0, eps),
        delta0,
        n_sub: subs.len(),
        n_super: supers.len(),
    })
}

/// Sub-solutions pointing along rays through a 9×9 grid of interior points,
/// scaled so their largest value on the Mach arc is `1 + ε/v − τ` with
/// `τ = ε/(10 v)`.
pub fn default_sub_family(domain: &Domain, eps: f64) -> Result<Vec<[f64; 3]>> {
    let lift = psi_lift(domain, eps);
    let tau = lift / 10.0;
    let arc: Vec<[f64; 3]> = (0..=1024)
        .map(|k| domain.boundary_point(Side::Cone, k as f64 / 1024.0).map(unit_ray))
        .collect::<Result<_>>()?;
    let mut family = Vec::with_capacity(81);
    for a in 1..10 {
        for b in 1..10 {
            let (xi, _) = transfinite_point(domain, a as f64 / 10.0, b as f64 / 10.0);
            let dir = unit_ray(xi);
            let max_cos = arc
                .iter()
                .map(|x| dir[0] * x[0] + dir[1] * x[1] + dir[2] * x[2])
                .fold(f64::NEG_INFINITY, f64::max);
            let m = (1.0 + lift - tau) / max_cos;
            let eta = dir.map(|c| m * c);
            if classify_eta(eta, domain, eps, Envelope::SAMPLES)? == EtaClass::Sub {
                family.push(eta);
            }
        }
    }
    Ok(family)
}

/// Super-solutions `(δ, −δ, M)` for `δ ∈ {0.05, 0.1, 0.2}`, `M ∈ {2v, 4v}`.
pub fn default_super_family(domain: &Domain, eps: f64) -> Result<Vec<[f64; 3]>> {
    let v = domain.v3inf;
    let mut family = Vec::new();
    for delta in [0.05, 0.1, 0.2] {
        for m in [2.0 * v, 4.0 * v] {
            let eta = [delta, -delta, m];
            if classify_eta(eta, domain, eps, Envelope::SAMPLES)? == EtaClass::Super {
                family.push(eta);
            }
        }
    }
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProblemConfig;
    use crate::fields::interior_residual;
    use crate::field::Sym2;
    use crate::geometry::{build_domain, build_mesh};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn standard() -> Domain {
        build_domain(&ProblemConfig::standard()).unwrap()
    }

    #[test]
    fn linear_exact_examples() {
        let s = linear_exact([0.0, 0.0, 2.0], [-0.7, 0.4]).unwrap();
        assert_eq!((s.phi, s.grad, s.chi, s.c2), (2.0, [0.0, 0.0], 2.0, 3.0));
        let s = linear_exact([0.3, 0.1, 2.0], [-1.0, 0.5]).unwrap();
        assert!((s.phi - 1.75).abs() < 1e-15);
        assert_eq!(s.chi, 2.0);
        assert!((s.c2 - 3.1).abs() < 1e-15);
        assert!(matches!(linear_exact([0.6, 0.8, 0.0], [0.0, 0.0]), Err(Error::InadmissibleEta(_))));
    }

    #[test]
    fn linear_exact_solves_interior_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let eta = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(1.5..4.0)];
            let xi = [rng.gen_range(-1.7..0.0), rng.gen_range(0.0..1.7)];
            let s = linear_exact(eta, xi).unwrap();
            for mu in [0.0, 0.5, 1.0] {
                assert_eq!(interior_residual(mu, s.phi, s.grad, Sym2::ZERO, xi), 0.0);
            }
        }
    }

    #[test]
    fn classification_examples() {
        let d = standard();
        let k = (1.0 + 0.05) / 2.09f64.sqrt();
        let sub = [-k, 0.3 * k, k];
        assert_eq!(classify_eta(sub, &d, 0.1, 64).unwrap(), EtaClass::Sub);
        assert_eq!(classify_eta([0.0, 0.0, 2.0], &d, 0.05, 64).unwrap(), EtaClass::Neither);
        assert_eq!(classify_eta([0.1, -0.1, 3.0], &d, 0.1, 64).unwrap(), EtaClass::Super);
        assert!(matches!(classify_eta([0.1, -0.1, 3.0], &d, 0.1, 8), Err(Error::Precondition(_))));
        assert!(matches!(classify_eta([0.0, 0.0, 1.0], &d, 0.1, 64), Err(Error::InadmissibleEta(_))));
    }

    #[test]
    fn normal_derivative_matches_finite_difference_on_sphere() {
        let d = standard();
        let eta = [0.4, -0.3, 2.5];
        let h = 1e-6;
        for side in [Side::Py, Side::Sy1, Side::Sy2] {
            let xi = d.boundary_point(side, 0.4).unwrap();
            let x = unit_ray(xi);
            let n = plane_normal(&d, side);
            // geodesic step from x towards n
            let step = |t: f64| {
                let y = [x[0] + t * n[0], x[1] + t * n[1], x[2] + t * n[2]];
                let r = norm3_sq(y).sqrt();
                (0..3).map(|k| eta[k] * y[k] / r).sum::<f64>()
            };
            let fd = (step(h) - step(-h)) / (2.0 * h);
            let exact = spherical_normal_derivative(eta, &d, side, xi);
            assert!((fd - exact).abs() < 1e-8, "{side:?}: {fd} vs {exact}");
        }
    }

    #[test]
    fn default_families_are_nonempty_and_classified() {
        let d = standard();
        for eps in [0.1, 0.0125] {
            let subs = default_sub_family(&d, eps).unwrap();
            let sups = default_super_family(&d, eps).unwrap();
            assert_eq!(subs.len(), 81);
            assert_eq!(sups.len(), 6);
        }
    }

    #[test]
    fn envelope_of_a_single_sub_solution_peaks_at_its_direction() {
        let d = standard();
        let mesh = build_mesh(&d, 33, 33).unwrap();
        let eps = 0.1;
        let k = mesh.index(8, 16);
        let star = mesh.nodes[k];
        let tau = eps / 10.0;
        let r = (1.0 + norm2(star)).sqrt();
        let eta = unit_ray(star).map(|c| c * (1.0 + eps / d.v3inf - tau));
        let env = envelope(&d, eps, &[eta, [0.1, -0.1, 3.0]], &mesh).unwrap();
        assert!((env.lower.values[k] - r * (1.0 + eps / d.v3inf - tau)).abs() < 1e-13);
        assert_eq!((env.n_sub, env.n_super), (1, 1));
    }

    #[test]
    fn envelope_ordering_and_cone_bound() {
        let d = standard();
        let mesh = build_mesh(&d, 33, 33).unwrap();
        for eps in [0.1, 0.05, 0.0125] {
            let mut family = default_sub_family(&d, eps).unwrap();
            family.extend(default_super_family(&d, eps).unwrap());
            let env = envelope(&d, eps, &family, &mesh).unwrap();
            for k in 0..mesh.len() {
                assert!(env.lower.values[k] <= env.upper.values[k]);
                if mesh.boundary_tags[k].on_cone() {
                    let r = (1.0 + norm2(mesh.nodes[k])).sqrt();
                    assert!(env.upper.values[k] >= r + eps - 1e-12);
                    assert!(env.lower.values[k] <= r + eps + 1e-12);
                }
            }
            assert!(env.delta0.is_finite());
        }
    }

    #[test]
    fn empty_classes_are_reported() {
        let d = standard();
        let mesh = build_mesh(&d, 17, 17).unwrap();
        let err = envelope(&d, 0.1, &[[0.1, -0.1, 3.0]], &mesh).unwrap_err();
        assert!(matches!(err, Error::EmptyFamily("sub")));
        let subs = default_sub_family(&d, 0.1).unwrap();
        let err = envelope(&d, 0.1, &subs, &mesh).unwrap_err();
        assert!(matches!(err, Error::EmptyFamily("super")));
    }
}
