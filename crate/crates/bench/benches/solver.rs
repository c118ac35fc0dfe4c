use chaplygin_core::config::GridSpec;
use chaplygin_core::solver::{BandedLu, Formulation};
use chaplygin_core::{build_domain, build_mesh, continuation_run, Discretization, ProblemConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn setup(n: usize) -> (ProblemConfig, Discretization, Vec<f64>) {
    let mut config = ProblemConfig::standard();
    config.grid = GridSpec { n_u: n, n_v: n };
    config.eps_schedule = vec![0.1];
    let domain = build_domain(&config).unwrap();
    let mesh = build_mesh(&domain, n, n).unwrap();
    let sweep = continuation_run(&config, &mesh).unwrap();
    let state = sweep.final_solution().field.values.clone();
    (config, Discretization::new(&domain, &mesh), state)
}

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    for n in [33, 65] {
        let (_, disc, state) = setup(n);
        group.bench_with_input(BenchmarkId::new("residual", n), &n, |b, _| {
            b.iter(|| disc.residual(1.0, 0.1, Formulation::Phi, black_box(&state), None))
        });
        group.bench_with_input(BenchmarkId::new("jacobian_analytic", n), &n, |b, _| {
            b.iter(|| disc.jacobian(1.0, Formulation::Phi, black_box(&state)))
        });
        group.bench_with_input(BenchmarkId::new("jacobian_colored", n), &n, |b, _| {
            b.iter(|| disc.jacobian_colored(1.0, 0.1, Formulation::Phi, black_box(&state)))
        });
        let jac = disc.jacobian(1.0, Formulation::Phi, &state);
        let rhs = disc.residual(1.0, 0.1, Formulation::Phi, &state, None);
        group.bench_with_input(BenchmarkId::new("banded_lu", n), &n, |b, _| {
            b.iter(|| {
                let lu = BandedLu::factor(black_box(&jac)).unwrap();
                let mut x = rhs.clone();
                lu.solve(&mut x);
                x
            })
        });
    }
    group.finish();
}

fn continuation(c: &mut Criterion) {
    let mut group = c.benchmark_group("continuation");
    group.sample_size(10);
    for n in [17, 33] {
        let mut config = ProblemConfig::standard();
        config.grid = GridSpec { n_u: n, n_v: n };
        let domain = build_domain(&config).unwrap();
        let mesh = build_mesh(&domain, n, n).unwrap();
        group.bench_with_input(BenchmarkId::new("standard_schedule", n), &n, |b, _| {
            b.iter(|| continuation_run(&config, black_box(&mesh)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, kernels, continuation);
criterion_main!(benches);
