use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{norm2, Vec2};
use crate::fields::{derived_state, envelope, grad_l2};
use crate::solver::{Discretization, RowKind, Solution};

/// Tolerance on `L² ≤ 1` everywhere.
pub const ELLIPTICITY_SLACK: f64 = 1e-6;
/// Mapped distance from the Mach arc beyond which strict ellipticity is required.
pub const INTERIOR_BAND: f64 = 0.1;
/// `C` in the Mach-arc allowance `|L² − 1| ≤ C (h + ε)`.
pub const CONE_EDGE_CONSTANT: f64 = 10.0;
/// `C` in the envelope slack `C h²`.
pub const SANDWICH_CONSTANT: f64 = 10.0;
/// `C` in the corner-gradient allowance `C h`.
pub const CORNER_CONSTANT: f64 = 10.0;
/// Cells next to the Mach arc left out of the `D(L²)` comparison.
pub const GRAD_L2_EXCLUDED_CELLS: usize = 2;
pub const GRAD_L2_MAX_REL: f64 = 1e-2;
pub const GRAD_L2_MEDIAN_REL: f64 = 1e-3;

/// Location of the node that decided a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeLocation {
    pub index: usize,
    pub i: usize,
    pub j: usize,
    pub xi: Vec2,
}

impl NodeLocation {
    fn of(disc: &Discretization, index: usize) -> Self {
        let (i, j) = disc.mesh.ij(index);
        Self {
            index,
            i,
            j,
            xi: disc.mesh.nodes[index],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub worst_node: Option<NodeLocation>,
    /// Secondary measurements.
    pub details: BTreeMap<String, f64>,
}

impl CheckRecord {
    fn new(name: &str, passed: bool, measured: f64, threshold: f64, worst: Option<NodeLocation>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            measured,
            threshold,
            worst_node: worst,
            details: BTreeMap::new(),
        }
    }

    fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub checks: Vec<CheckRecord>,
    /// Discretization allowances used by the checks.
    pub allowances: BTreeMap<String, f64>,
    pub all_passed: bool,
}

impl InvariantReport {
    pub fn new(checks: Vec<CheckRecord>) -> Self {
        let allowances = [
            ("ellipticity_slack", ELLIPTICITY_SLACK),
            ("interior_band", INTERIOR_BAND),
            ("cone_edge_constant", CONE_EDGE_CONSTANT),
            ("sandwich_constant", SANDWICH_CONSTANT),
            ("corner_constant", CORNER_CONSTANT),
            ("grad_l2_excluded_cells", GRAD_L2_EXCLUDED_CELLS as f64),
            ("grad_l2_max_rel", GRAD_L2_MAX_REL),
            ("grad_l2_median_rel", GRAD_L2_MEDIAN_REL),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let all_passed = checks.iter().all(|c| c.passed);
        Self {
            checks,
            allowances,
            all_passed,
        }
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Nodal `L²`, or `+∞` where `c² ≤ 0`.
pub fn l2_field(solution: &Solution, disc: &Discretization) -> Vec<f64> {
    let values = &solution.field.values;
    (0..disc.len())
        .map(|k| {
            let g = disc.gradient(k, values);
            derived_state(values[k], g, disc.mesh.nodes[k], 1.0)
                .l2
                .unwrap_or(f64::INFINITY)
        })
        .collect()
}

fn argmax(values: impl Iterator<Item = (usize, f64)>) -> Option<(usize, f64)> {
    values.fold(None, |best, (k, v)| match best {
        Some((_, b)) if b >= v => best,
        _ => Some((k, v)),
    })
}

pub fn check_ellipticity(solution: &Solution, disc: &Discretization) -> CheckRecord {
    let l2 = l2_field(solution, disc);
    let mesh = &disc.mesh;
    let (worst, max_l2) = argmax(l2.iter().copied().enumerate()).expect("nonempty mesh");
    let band = argmax(
        l2.iter()
            .copied()
            .enumerate()
            .filter(|&(k, _)| mesh.mapped_distance_to_cone(k) >= INTERIOR_BAND - 1e-12),
    );
    let (band_node, band_max) = band.unwrap_or((worst, f64::NEG_INFINITY));
    let delta_int = 1.0 - band_max;
    let cone_allowance = CONE_EDGE_CONSTANT * (mesh.h() + solution.eps);
    let (cone_node, cone_defect) = argmax(
        l2.iter()
            .enumerate()
            .filter(|&(k, _)| disc.kinds[k] == RowKind::Cone)
            .map(|(k, v)| (k, (v - 1.0).abs())),
    )
    .expect("mesh has Mach-arc nodes");
    let everywhere = max_l2 <= 1.0 + ELLIPTICITY_SLACK;
    let interior = delta_int > 0.0;
    let edge = cone_defect <= cone_allowance;
    let decisive = if !everywhere {
        worst
    } else if !interior {
        band_node
    } else if !edge {
        cone_node
    } else {
        worst
    };
    CheckRecord::new(
        "ellipticity",
        everywhere && interior && edge,
        max_l2,
        1.0 + ELLIPTICITY_SLACK,
        Some(NodeLocation::of(disc, decisive)),
    )
    .detail("delta_int", delta_int)
    .detail("cone_defect", cone_defect)
    .detail("cone_allowance", cone_allowance)
}

pub fn check_sandwich(solution: &Solution, disc: &Discretization, eta_family: &[[f64; 3]]) -> Result<CheckRecord> {
    let mesh = &disc.mesh;
    let env = envelope(&disc.domain, solution.eps, eta_family, mesh)?;
    let slack = SANDWICH_CONSTANT * mesh.h() * mesh.h();
    let (worst, violation) = argmax((0..mesh.len()).map(|k| {
        let phi = solution.field.values[k];
        let below = env.lower.values[k] - slack - phi;
        let above = phi - env.upper.values[k] - slack;
        (k, below.max(above))
    }))
    .expect("nonempty mesh");
    Ok(CheckRecord::new(
        "sandwich",
        violation <= 0.0 && env.delta0 > 0.0,
        violation,
        0.0,
        Some(NodeLocation::of(disc, worst)),
    )
    .detail("delta0", env.delta0)
    .detail("slack", slack)
    .detail("n_sub", env.n_sub as f64)
    .detail("n_super", env.n_super as f64))
}

/// Gradients at P3 and P4 implied by the two conditions meeting there.
pub fn corner_gradients(disc: &Discretization, phi_p3: f64, phi_p4: f64) -> [Vec2; 2] {
    let d = &disc.domain;
    let t2 = d.tan_sigma2();
    let cot1 = 1.0 / d.sigma1.tan();
    [
        [phi_p3 * t2 / (t2 * d.p3[0] - 1.0), 0.0],
        [0.0, phi_p4 / (cot1 + d.p4[1])],
    ]
}

pub fn check_corner_gradients(solution: &Solution, disc: &Discretization) -> CheckRecord {
    let mesh = &disc.mesh;
    let values = &solution.field.values;
    let p3 = mesh.index(0, 0);
    let p4 = mesh.index(0, mesh.n_v - 1);
    let expected = corner_gradients(disc, values[p3], values[p4]);
    let err = |k: usize, e: Vec2| {
        let g = disc.gradient(k, values);
        ((g[0] - e[0]).powi(2) + (g[1] - e[1]).powi(2)).sqrt()
    };
    let (e3, e4) = (err(p3, expected[0]), err(p4, expected[1]));
    let threshold = CORNER_CONSTANT * mesh.h();
    let (worst, measured) = if e3 >= e4 { (p3, e3) } else { (p4, e4) };
    CheckRecord::new(
        "corner_gradients",
        measured <= threshold,
        measured,
        threshold,
        Some(NodeLocation::of(disc, worst)),
    )
    .detail("error_p3", e3)
    .detail("error_p4", e4)
}

/// Locates the largest `|Dφ|²`. It must sit within one cell of the Mach arc
/// or at a wing-edge corner P3/P4, where the two flat-side conditions fix the
/// gradient; ties go to those locations.
pub fn check_boundary_max(solution: &Solution, disc: &Discretization) -> CheckRecord {
    let mesh = &disc.mesh;
    let values = &solution.field.values;
    let speed: Vec<f64> = (0..mesh.len()).map(|k| norm2(disc.gradient(k, values))).collect();
    let top = speed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tie = 1e-12 * top.abs().max(1.0);
    let corners = [mesh.index(0, 0), mesh.index(0, mesh.n_v - 1)];
    let allowed = |k: usize| mesh.cells_from_cone(k) <= 1 || corners.contains(&k);
    let candidates: Vec<usize> = (0..mesh.len()).filter(|&k| speed[k] >= top - tie).collect();
    let chosen = candidates
        .iter()
        .copied()
        .find(|&k| allowed(k))
        .unwrap_or(candidates[0]);
    let allowed_max = (0..mesh.len())
        .filter(|&k| allowed(k))
        .map(|k| speed[k])
        .fold(f64::NEG_INFINITY, f64::max);
    CheckRecord::new(
        "boundary_max",
        allowed(chosen),
        top,
        allowed_max,
        Some(NodeLocation::of(disc, chosen)),
    )
    .detail("cells_from_cone", mesh.cells_from_cone(chosen) as f64)
    .detail("at_corner", if corners.contains(&chosen) { 1.0 } else { 0.0 })
}

pub fn check_grad_l2_identity(solution: &Solution, disc: &Discretization) -> CheckRecord {
    let mesh = &disc.mesh;
    let values = &solution.field.values;
    let l2 = l2_field(solution, disc);
    let mut errors: Vec<(usize, f64)> = Vec::new();
    for k in 0..mesh.len() {
        if disc.kinds[k] != RowKind::Interior || mesh.cells_from_cone(k) <= GRAD_L2_EXCLUDED_CELLS {
            continue;
        }
        let stencil_ok = disc.stencil(k).iter().all(|&m| l2[m].is_finite());
        let h = disc.hessian(k, values).expect("interior node");
        let g = disc.gradient(k, values);
        let Ok(formula) = grad_l2(values[k], g, h, mesh.nodes[k]) else {
            errors.push((k, f64::INFINITY));
            continue;
        };
        if !stencil_ok {
            errors.push((k, f64::INFINITY));
            continue;
        }
        let fd = disc.gradient(k, &l2);
        let diff = ((formula[0] - fd[0]).powi(2) + (formula[1] - fd[1]).powi(2)).sqrt();
        let scale = norm2(fd).sqrt().max(norm2(formula).sqrt());
        errors.push((k, if scale > 0.0 { diff / scale } else { 0.0 }));
    }
    let (worst, max_rel) = argmax(errors.iter().copied()).unwrap_or((0, 0.0));
    let mut sorted: Vec<f64> = errors.iter().map(|e| e.1).collect();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.is_empty() { 0.0 } else { sorted[sorted.len() / 2] };
    CheckRecord::new(
        "grad_l2_identity",
        max_rel <= GRAD_L2_MAX_REL && median <= GRAD_L2_MEDIAN_REL,
        max_rel,
        GRAD_L2_MAX_REL,
        Some(NodeLocation::of(disc, worst)),
    )
    .detail("median_rel", median)
    .detail("nodes", sorted.len() as f64)
}
