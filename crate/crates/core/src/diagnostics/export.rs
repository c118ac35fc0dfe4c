use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::field::Vec2;
use crate::fields::derived_state;
use crate::geometry::shock_cone_sample;
use crate::solver::{Discretization, Solution, SweepResult};

use super::InvariantReport;

pub const CSV_HEADER: &str = "xi1,xi2,phi,dphi1,dphi2,chi,c2,L2,rho,tag";

/// Derived quantities at one node.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeRecord {
    pub xi: Vec2,
    pub phi: f64,
    pub grad: Vec2,
    pub chi: f64,
    pub c2: f64,
    pub l2: Option<f64>,
    pub rho: Option<f64>,
    pub tag: &'static str,
}

pub fn node_records(solution: &Solution, disc: &Discretization, chaplygin_a: f64) -> Vec<NodeRecord> {
    let values = &solution.field.values;
    (0..disc.len())
        .map(|k| {
            let xi = disc.mesh.nodes[k];
            let grad = disc.gradient(k, values);
            let st = derived_state(values[k], grad, xi, chaplygin_a);
            NodeRecord {
                xi,
                phi: values[k],
                grad,
                chi: st.chi,
                c2: st.c2,
                l2: st.l2,
                rho: st.rho,
                tag: disc.mesh.boundary_tags[k].label(),
            }
        })
        .collect()
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), num)
}

/// Writes `contents` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Precondition(format!("{} has no file name", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn fields_csv(records: &[NodeRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 220);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            num(r.xi[0]),
            num(r.xi[1]),
            num(r.phi),
            num(r.grad[0]),
            num(r.grad[1]),
            num(r.chi),
            num(r.c2),
            opt(r.l2),
            opt(r.rho),
            r.tag
        );
    }
    out
}

/// Legacy ASCII structured grid with the CSV quantities as point data.
pub fn fields_vtk(records: &[NodeRecord], n_u: usize, n_v: usize) -> String {
    let n = records.len();
    let mut out = String::with_capacity(n * 200);
    out.push_str("# vtk DataFile Version 3.0\nconical potential\nASCII\nDATASET STRUCTURED_GRID\n");
    let _ = writeln!(out, "DIMENSIONS {n_u} {n_v} 1\nPOINTS {n} double");
    for r in records {
        let _ = writeln!(out, "{} {} {}", num(r.xi[0]), num(r.xi[1]), num(0.0));
    }
    let _ = writeln!(out, "POINT_DATA {n}");
    type Getter = fn(&NodeRecord) -> f64;
    let scalars: [(&str, Getter); 5] = [
        ("phi", |r| r.phi),
        ("chi", |r| r.chi),
        ("c2", |r| r.c2),
        ("L2", |r| r.l2.unwrap_or(f64::NAN)),
        ("rho", |r| r.rho.unwrap_or(f64::NAN)),
    ];
    for (name, get) in scalars {
        let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for r in records {
            out.push_str(&num(get(r)));
            out.push('\n');
        }
    }
    out.push_str("VECTORS dphi double\n");
    for r in records {
        let _ = writeln!(out, "{} {} {}", num(r.grad[0]), num(r.grad[1]), num(0.0));
    }
    out
}

/// Points of the shock cone at unit height as `x1,x2,x3` rows.
pub fn shock_csv(config: &ProblemConfig, n: usize) -> Result<String> {
    let mut out = String::from("x1,x2,x3\n");
    for p in shock_cone_sample(config, n)? {
        let _ = writeln!(out, "{},{},{}", num(p[0]), num(p[1]), num(p[2]));
    }
    Ok(out)
}

/// Residual history of one Newton solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub mu: f64,
    pub eps: f64,
    pub converged: bool,
    pub residuals: Vec<f64>,
}

/// Everything `report.json` holds. Contains no timestamps, so repeated runs
/// produce identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ProblemConfig,
    pub n_u: usize,
    pub n_v: usize,
    pub final_mu: f64,
    pub final_eps: f64,
    pub invariants: InvariantReport,
    pub residual_histories: Vec<HistoryEntry>,
    pub cauchy_deltas: Vec<f64>,
    /// Number of `(μ, ε, node)` triples below the lifted Mach-arc value.
    pub membership_failures: usize,
    pub inserted_mu_steps: Vec<[f64; 2]>,
}

impl RunReport {
    pub fn new(config: &ProblemConfig, disc: &Discretization, sweep: &SweepResult, invariants: InvariantReport) -> Self {
        let last = sweep.final_solution();
        Self {
            config: config.clone(),
            n_u: disc.mesh.n_u,
            n_v: disc.mesh.n_v,
            final_mu: last.mu,
            final_eps: last.eps,
            invariants,
            residual_histories: sweep
                .solutions
                .iter()
                .map(|s| HistoryEntry {
                    mu: s.mu,
                    eps: s.eps,
                    converged: s.converged,
                    residuals: s.residual_history.clone(),
                })
                .collect(),
            cauchy_deltas: sweep.cauchy_deltas.clone(),
            membership_failures: sweep.membership_failures.len(),
            inserted_mu_steps: sweep.inserted_steps.iter().map(|&(m, e)| [m, e]).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Schema for `report.json`.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");
