use std::fmt::Write as _;
use std::path::Path;

use chaplygin_core::diagnostics::{
    fields_csv, fields_vtk, node_records, run_checks, shock_csv, verify, InvariantReport, RunReport,
};
use chaplygin_core::solver::Solution;
use chaplygin_core::{build_domain, build_mesh, continuation_run, Discretization, Error, ProblemConfig, SweepResult};

use crate::manifest::RunManifest;
use crate::{CommonArgs, Status};

const SHOCK_SAMPLES: usize = 256;
const MIN_SWEEP_LEVELS: usize = 3;

fn read_config(args: &CommonArgs) -> Result<ProblemConfig, Error> {
    let mut config = ProblemConfig::from_path(&args.config)?;
    if let Some(n) = args.grid {
        config.grid.n_u = n;
        config.grid.n_v = n;
        config.validate()?;
    }
    Ok(config)
}

fn load_config(args: &CommonArgs, manifest: &mut RunManifest) -> Result<ProblemConfig, Status> {
    let config = manifest.record("config", Status::ConfigError, read_config(args))?;
    manifest.config = Some(config.clone());
    Ok(config)
}

fn create_out_dir(dir: &Path, manifest: &mut RunManifest) -> Result<(), Status> {
    let created = std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e));
    manifest.record("output_dir", Status::SolverFailure, created)
}

fn discretize(config: &ProblemConfig) -> Result<Discretization, Error> {
    let domain = build_domain(config)?;
    let mesh = build_mesh(&domain, config.grid.n_u, config.grid.n_v)?;
    Ok(Discretization::new(&domain, &mesh))
}

fn discretize_and_solve(
    config: &ProblemConfig,
    manifest: &mut RunManifest,
) -> Result<(Discretization, SweepResult), Status> {
    let disc = manifest.record("mesh", Status::SolverFailure, discretize(config))?;
    let sweep = continuation_run(config, &disc.mesh);
    let sweep = manifest.record("continuation", Status::SolverFailure, sweep)?;
    Ok((disc, sweep))
}

fn print_checks(report: &InvariantReport) {
    for c in &report.checks {
        println!(
            "{:<18} {:<4} measured {:>12.4e} threshold {:>12.4e}",
            c.name,
            if c.passed { "ok" } else { "FAIL" },
            c.measured,
            c.threshold
        );
    }
}

fn export_fields(
    dir: &Path,
    stem: &str,
    config: &ProblemConfig,
    disc: &Discretization,
    solution: &Solution,
    manifest: &mut RunManifest,
) -> Result<(), Error> {
    let records = node_records(solution, disc, config.chaplygin_a);
    manifest.output(dir.join(format!("{stem}.csv")), fields_csv(&records).as_bytes())?;
    let vtk = fields_vtk(&records, disc.mesh.n_u, disc.mesh.n_v);
    manifest.output(dir.join(format!("{stem}.vtk")), vtk.as_bytes())
}

fn write_report(
    dir: &Path,
    config: &ProblemConfig,
    disc: &Discretization,
    sweep: &SweepResult,
    invariants: InvariantReport,
    manifest: &mut RunManifest,
) -> Result<(), Error> {
    let report = RunReport::new(config, disc, sweep, invariants);
    manifest.output(dir.join("report.json"), report.to_json()?.as_bytes())
}

pub fn solve(args: &CommonArgs) -> Status {
    let mut manifest = RunManifest::new("solve", &args.config);
    let status = run_solve(args, &mut manifest).unwrap_or_else(|s| s);
    manifest.finish(&args.out, status)
}

fn run_solve(args: &CommonArgs, manifest: &mut RunManifest) -> Result<Status, Status> {
    let config = load_config(args, manifest)?;
    create_out_dir(&args.out, manifest)?;
    let (disc, sweep) = discretize_and_solve(&config, manifest)?;
    let final_solution = sweep.final_solution();
    let invariants = manifest.record("diagnostics", Status::SolverFailure, run_checks(final_solution, &disc))?;
    print_checks(&invariants);
    let passed = invariants.all_passed;

    let dir = &args.out;
    let exported = export_fields(dir, "fields", &config, &disc, final_solution, manifest)
        .and_then(|()| write_report(dir, &config, &disc, &sweep, invariants, manifest))
        .and_then(|()| shock_csv(&config, SHOCK_SAMPLES))
        .and_then(|shock| manifest.output(dir.join("shock.csv"), shock.as_bytes()));
    manifest.record("export", Status::SolverFailure, exported)?;
    Ok(if passed { Status::Ok } else { Status::ChecksFailed })
}

pub fn verify(args: &CommonArgs) -> Status {
    let config = match read_config(args) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            return Status::ConfigError;
        }
    };
    match verify::run_suite(&config, args.seed, &verify::Kernels::default()) {
        Ok(report) => {
            print!("{}", report.table());
            if report.all_passed() {
                Status::Ok
            } else {
                eprintln!("failed checks: {}", report.failed().join(", "));
                Status::ChecksFailed
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            Status::SolverFailure
        }
    }
}

pub fn sweep(args: &CommonArgs) -> Status {
    let mut manifest = RunManifest::new("sweep", &args.config);
    let status = run_sweep(args, &mut manifest).unwrap_or_else(|s| s);
    manifest.finish(&args.out, status)
}

fn cauchy_csv(sweep: &SweepResult) -> String {
    let mut out = String::from("eps,sup_delta\n");
    let finals = sweep.finals();
    for (solution, delta) in finals.iter().skip(1).zip(&sweep.cauchy_deltas) {
        let _ = writeln!(out, "{:.16e},{:.16e}", solution.eps, delta);
    }
    out
}

fn run_sweep(args: &CommonArgs, manifest: &mut RunManifest) -> Result<Status, Status> {
    let config = load_config(args, manifest)?;
    let levels = config.eps_schedule.len();
    if levels < MIN_SWEEP_LEVELS {
        let message = format!("sweep needs at least {MIN_SWEEP_LEVELS} eps levels, the schedule has {levels}");
        return Err(manifest.fail("config", message));
    }
    create_out_dir(&args.out, manifest)?;
    let (disc, sweep) = discretize_and_solve(&config, manifest)?;
    let invariants = manifest.record(
        "diagnostics",
        Status::SolverFailure,
        run_checks(sweep.final_solution(), &disc),
    )?;

    let deltas = &sweep.cauchy_deltas;
    for (k, d) in deltas.iter().enumerate() {
        println!("delta[{k}] = {d:.6e}");
    }
    let decreasing = deltas.windows(2).all(|w| w[1] < w[0]);

    let dir = &args.out;
    let limit = Solution {
        field: sweep.extrapolated.clone(),
        mu: 1.0,
        eps: 0.0,
        converged: true,
        residual_history: Vec::new(),
    };
    let mut exported = manifest.output(dir.join("cauchy.csv"), cauchy_csv(&sweep).as_bytes());
    for (k, solution) in sweep.finals().into_iter().enumerate() {
        exported = exported.and_then(|()| export_fields(dir, &format!("fields_eps{k}"), &config, &disc, solution, manifest));
    }
    let exported = exported
        .and_then(|()| export_fields(dir, "fields_extrapolated", &config, &disc, &limit, manifest))
        .and_then(|()| write_report(dir, &config, &disc, &sweep, invariants, manifest));
    manifest.record("export", Status::SolverFailure, exported)?;
    Ok(if decreasing { Status::Ok } else { Status::ChecksFailed })
}
