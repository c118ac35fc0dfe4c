//! Physical and numerical input read from the run's JSON document.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// How the Newton Jacobian is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianMode {
    #[default]
    Analytic,
    ColoredDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonOptions {
    /// Target for the sup-norm of the discrete residual.
    pub tol: f64,
    /// Iteration cap per (mu, eps) stage.
    pub max_iter: usize,
    /// Cap on step halvings in the line search.
    pub max_backtracks: usize,
    #[serde(default)]
    pub jacobian_mode: JacobianMode,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 30,
            max_backtracks: 8,
            jacobian_mode: JacobianMode::Analytic,
        }
    }
}

impl NewtonOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("newton.tol = {} must be positive", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("newton.max_iter must be at least 1".into()));
        }
        if self.max_backtracks < 1 {
            return Err(Error::InvalidConfig("newton.max_backtracks must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_u: usize,
    pub n_v: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_u: 65, n_v: 65 }
    }
}

/// Wing geometry, freestream, pressure law and the continuation schedules.
///
/// Angles are radians. The Bernoulli constant is normalized to one, so the
/// freestream speed `v3inf` is nondimensional and must exceed one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub sigma1: f64,
    pub sigma2: f64,
    pub v3inf: f64,
    #[serde(rename = "chaplygin_A")]
    pub chaplygin_a: f64,
    /// Targets visited after the `μ = 0` solve; must end at 1.
    pub mu_schedule: Vec<f64>,
    pub eps_schedule: Vec<f64>,
    #[serde(default)]
    pub newton: NewtonOptions,
    #[serde(default)]
    pub grid: GridSpec,
}

impl ProblemConfig {
    /// The reference configuration: `v = 2`, `σ₁ = σ₂ = π/6`, `μ` in steps of
    /// 0.1 and four halvings of `ε` starting at 0.1.
    pub fn standard() -> Self {
        Self {
            sigma1: std::f64::consts::FRAC_PI_6,
            sigma2: std::f64::consts::FRAC_PI_6,
            v3inf: 2.0,
            chaplygin_a: 1.0,
            mu_schedule: (0..=10).map(|k| k as f64 / 10.0).collect(),
            eps_schedule: vec![0.1, 0.05, 0.025, 0.0125],
            newton: NewtonOptions::default(),
            grid: GridSpec::default(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: ProblemConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// Half vertex angle of the Mach cone.
    pub fn sigma_inf(&self) -> Result<f64> {
        crate::geometry::critical_angle(self.v3inf)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.sigma1, self.sigma2, self.v3inf, self.chaplygin_a];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("non-finite scalar parameter".into()));
        }
        let critical = self.sigma_inf()?;
        for (name, angle) in [("sigma1", self.sigma1), ("sigma2", self.sigma2)] {
            if !(angle > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} = {angle} must be positive")));
            }
            if angle >= critical {
                return Err(Error::AngleTooLarge {
                    name,
                    angle,
                    critical,
                });
            }
        }
        if !(self.chaplygin_a > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "chaplygin_A = {} must be positive",
                self.chaplygin_a
            )));
        }
        validate_mu_schedule(&self.mu_schedule)?;
        validate_eps_schedule(&self.eps_schedule)?;
        self.newton.validate()?;
        if self.grid.n_u < 9 || self.grid.n_v < 9 {
            return Err(Error::MeshTooSmall {
                n_u: self.grid.n_u,
                n_v: self.grid.n_v,
            });
        }
        Ok(())
    }
}

fn validate_mu_schedule(mu: &[f64]) -> Result<()> {
    let (Some(&first), Some(&last)) = (mu.first(), mu.last()) else {
        return Err(Error::InvalidConfig("mu_schedule is empty".into()));
    };
    if !(0.0..=1.0).contains(&first) || last != 1.0 {
        return Err(Error::InvalidConfig("mu_schedule must end at 1".into()));
    }
    if mu.iter().any(|m| !(0.0..=1.0).contains(m)) {
        return Err(Error::InvalidConfig("mu_schedule values must lie in [0, 1]".into()));
    }
    if mu.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidConfig("mu_schedule must be nondecreasing".into()));
    }
    Ok(())
}

fn validate_eps_schedule(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::InvalidConfig("eps_schedule is empty".into()));
    }
    if eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidConfig("eps_schedule values must be positive".into()));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig("eps_schedule must be strictly decreasing".into()));
    }
    Ok(())
}
