//! Solver-free checks of the closed-form kernels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ProblemConfig;
use crate::error::Result;
use crate::field::{norm2, Sym2, Vec2};
use crate::fields::{self, SDirection, SphericalPoint, StateDerived};
use crate::geometry::{self, build_domain, Domain, Side};

/// Kernel entry points exercised by [`run_suite`]. Tests substitute single
/// entries to confirm that a broken kernel is caught by name.
#[derive(Clone, Copy)]
pub struct Kernels {
    pub critical_angle: fn(f64) -> Result<f64>,
    pub interior_residual: fn(f64, f64, Vec2, Sym2, Vec2) -> f64,
    pub derived_state: fn(f64, Vec2, Vec2, f64) -> StateDerived,
    pub grad_l2: fn(f64, Vec2, Sym2, Vec2) -> Result<Vec2>,
    pub characteristic_form: fn([f64; 3], [f64; 3]) -> Result<f64>,
    pub s_transform: fn(f64, Vec2, SDirection) -> Result<f64>,
    pub spherical_lift: fn(Vec2, f64) -> (SphericalPoint, f64),
    pub spherical_unlift: fn(SphericalPoint, f64) -> Result<(Vec2, f64)>,
    pub hat_transform: fn(Vec2, f64, f64) -> Result<(Vec2, f64)>,
    pub hat_inverse: fn(Vec2, f64, f64) -> Result<(Vec2, f64)>,
}

impl Default for Kernels {
    fn default() -> Self {
        Self {
            critical_angle: geometry::critical_angle,
            interior_residual: fields::interior_residual,
            derived_state: fields::derived_state,
            grad_l2: fields::grad_l2,
            characteristic_form: fields::characteristic_form,
            s_transform: fields::s_transform,
            spherical_lift: fields::spherical_lift,
            spherical_unlift: fields::spherical_unlift,
            hat_transform: fields::hat_transform,
            hat_inverse: fields::hat_inverse,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyRow {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub sigma_inf: f64,
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.rows.iter().filter(|r| !r.passed).map(|r| r.name).collect()
    }

    /// Fixed-width text table.
    pub fn table(&self) -> String {
        let mut out = format!("sigma_inf = {:.7}\n", self.sigma_inf);
        out.push_str(&format!("{:<32} {:<6} {:>12} {:>12}\n", "check", "status", "measured", "threshold"));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<32} {:<6} {:>12.3e} {:>12.3e}\n",
                r.name,
                if r.passed { "PASS" } else { "FAIL" },
                r.measured,
                r.threshold
            ));
        }
        out
    }
}

fn row(name: &'static str, measured: f64, threshold: f64) -> VerifyRow {
    VerifyRow {
        name,
        passed: measured <= threshold,
        measured,
        threshold,
    }
}

/// Uniform sample of the closed domain by rejection from its bounding box.
fn sample_point(domain: &Domain, rng: &mut ChaCha8Rng) -> Vec2 {
    let r = domain.mach_radius;
    loop {
        let xi = [rng.gen_range(-r..=0.0), rng.gen_range(0.0..=r)];
        if domain.contains(xi) {
            return xi;
        }
    }
}

/// Random `η` with `|η|² ∈ (1.1, 25)`.
pub fn random_eta(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let eta = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-5.0..5.0)];
        let n2: f64 = eta.iter().map(|e| e * e).sum();
        if n2 > 1.1 && n2 < 25.0 {
            return eta;
        }
    }
}

/// Smooth manufactured potential with closed-form derivatives.
pub fn manufactured(xi: Vec2) -> (f64, Vec2, Sym2) {
    let [x, y] = xi;
    let phi = 2.2 + 0.3 * x * x - 0.2 * x * y + 0.1 * y * y * y + 0.05 * (x + 2.0 * y).sin();
    let c = 0.05 * (x + 2.0 * y).cos();
    let s = -0.05 * (x + 2.0 * y).sin();
    let grad = [0.6 * x - 0.2 * y + c, -0.2 * x + 0.3 * y * y + 2.0 * c];
    let hess = Sym2::new(0.6 + s, -0.2 + 2.0 * s, 0.6 * y + 4.0 * s);
    (phi, grad, hess)
}

/// Runs every closed-form check on `config`'s geometry.
pub fn run_suite(config: &ProblemConfig, seed: u64, k: &Kernels) -> Result<VerifyReport> {
    let domain = build_domain(config)?;
    let v = config.v3inf;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();

    let sigma_inf = (k.critical_angle)(v)?;
    let defect = ((v * sigma_inf.sin()).powi(2) - (v * v - 1.0)).abs() / (v * v);
    rows.push(row("critical_angle", defect, 1e-12));

    let mut worst: f64 = 0.0;
    let corners = [
        (domain.p1, [Side::Cone, Side::Sy1]),
        (domain.p2, [Side::Cone, Side::Sy2]),
        (domain.p3, [Side::Py, Side::Sy2]),
        (domain.p4, [Side::Py, Side::Sy1]),
    ];
    for (p, sides) in corners {
        for side in sides {
            worst = worst.max(domain.side_defect(side, p).abs());
        }
    }
    let angles_ok = config.sigma1 < sigma_inf && config.sigma2 < sigma_inf;
    rows.push(row("domain_invariants", if angles_ok { worst } else { f64::INFINITY }, 1e-12));

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let eta = random_eta(&mut rng);
        let xi = sample_point(&domain, &mut rng);
        let phi = eta[0] * xi[0] + eta[1] * xi[1] + eta[2];
        for mu in [0.0, 0.5, 1.0] {
            let r = (k.interior_residual)(mu, phi, [eta[0], eta[1]], Sym2::ZERO, xi);
            worst = worst.max(r.abs());
        }
    }
    rows.push(row("exact_solution_annihilation", worst, 0.0));

    let mut s_err: f64 = 0.0;
    let mut sph_err: f64 = 0.0;
    let mut hat_err: f64 = 0.0;
    for _ in 0..100 {
        let xi = sample_point(&domain, &mut rng);
        let s = rng.gen_range(0.01..3.0);
        let phi = (k.s_transform)(s, xi, SDirection::FromS)?;
        let back = (k.s_transform)(phi, xi, SDirection::ToS)?;
        s_err = s_err.max((back - s).abs() / s.max(1.0) * s.tanh().min(1.0));
        let (zeta, psi) = (k.spherical_lift)(xi, phi);
        let (xi2, phi2) = (k.spherical_unlift)(zeta, psi)?;
        sph_err = sph_err.max((xi2[0] - xi[0]).abs().max((xi2[1] - xi[1]).abs()).max((phi2 - phi).abs() / phi));
        let (xh, ph) = (k.hat_transform)(xi, phi, config.sigma2)?;
        let (xi3, phi3) = (k.hat_inverse)(xh, ph, config.sigma2)?;
        hat_err = hat_err.max((xi3[0] - xi[0]).abs().max((xi3[1] - xi[1]).abs()).max((phi3 - phi).abs() / phi));
    }
    let (p3_hat, _) = (k.hat_transform)(domain.p3, 1.0, config.sigma2)?;
    rows.push(row("s_round_trip", s_err, 1e-13));
    rows.push(row("spherical_round_trip", sph_err, 1e-13));
    rows.push(row("hat_round_trip", hat_err, 1e-13));
    rows.push(row("hat_maps_p3_to_origin", p3_hat[0].abs().max(p3_hat[1].abs()), 1e-13));

    rows.push(row("grad_l2_manufactured", grad_l2_oracle(&domain, &mut rng, k)?, 1e-4));

    let mut worst: f64 = 0.0;
    let grad_phi = [0.0, 0.0, v];
    let c2 = v * v - 1.0;
    for n in 0..32 {
        let t = std::f64::consts::TAU * n as f64 / 32.0;
        let r = c2.sqrt();
        let normal = [r * t.cos(), r * t.sin(), -c2];
        let len = (normal.iter().map(|a| a * a).sum::<f64>()).sqrt();
        let kappa = normal.map(|a| a / len);
        worst = worst.max((k.characteristic_form)(kappa, grad_phi)?.abs());
        let gen = [r * t.cos(), r * t.sin(), 1.0];
        let glen = (gen.iter().map(|a| a * a).sum::<f64>()).sqrt();
        let along: f64 = gen.iter().zip(&grad_phi).map(|(a, b)| a * b / glen).sum();
        worst = worst.max((v * v - along * along - c2).abs());
    }
    rows.push(row("characteristic_mach_cone", worst, 1e-13));

    Ok(VerifyReport { sigma_inf, rows })
}

/// Largest relative gap between the `D(L²)` kernel and central differences
/// of `L²` for a manufactured potential.
fn grad_l2_oracle(domain: &Domain, rng: &mut ChaCha8Rng, k: &Kernels) -> Result<f64> {
    let l2_at = |xi: Vec2| {
        let (phi, grad, _) = manufactured(xi);
        (k.derived_state)(phi, grad, xi, 1.0).l2
    };
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    while tested < 50 {
        let xi = sample_point(domain, rng);
        let (phi, grad, hess) = manufactured(xi);
        let Ok(formula) = (k.grad_l2)(phi, grad, hess, xi) else { continue };
        let mut fd = [0.0; 2];
        let mut ok = true;
        for a in 0..2 {
            let (mut p, mut m) = (xi, xi);
            p[a] += h;
            m[a] -= h;
            match (l2_at(p), l2_at(m)) {
                (Some(lp), Some(lm)) => fd[a] = (lp - lm) / (2.0 * h),
                _ => ok = false,
            }
        }
        if !ok {
            continue;
        }
        let diff = ((formula[0] - fd[0]).powi(2) + (formula[1] - fd[1]).powi(2)).sqrt();
        worst = worst.max(diff / norm2(fd).sqrt().max(1e-3));
        tested += 1;
    }
    Ok(worst)
}
