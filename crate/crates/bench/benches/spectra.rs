use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use solvspec_bench::figure_eight;
use solvspec_core::coexact::{certify_lambda1_star, coexact_mode_spectrum_auto, Lambda1Config};
use solvspec_core::dirac::{dirac_kernel, DiracConfig};
use solvspec_core::ode1d::fd_solve_auto;
use solvspec_core::scalar::ScalarModeOperator;
use solvspec_core::solvlat::{dual_lattice, enumerate_modes, DualMode, SpinStructure};

fn orbits(c: &mut Criterion) {
    let l = figure_eight(1.0);
    let dual = dual_lattice(&l).unwrap();
    c.bench_function("enumerate_modes cutoff 500", |b| {
        b.iter(|| enumerate_modes(black_box(&dual), l.a, 500.0).unwrap())
    });
}

fn mode_solvers(c: &mut Criterion) {
    let m = DualMode::from_components(3.0, 2.0);
    let op = ScalarModeOperator::new(m).unwrap().operator();
    c.bench_function("scalar mode n=2000 k=4", |b| b.iter(|| fd_solve_auto(black_box(&op), 2000, 4).unwrap()));
    c.bench_function("curl mode n=2000 k=4", |b| {
        b.iter(|| coexact_mode_spectrum_auto(black_box(&m), 4, 2000).unwrap())
    });
}

fn certificates(c: &mut Criterion) {
    let l = figure_eight(0.9);
    let mut g = c.benchmark_group("certificates");
    g.sample_size(10);
    g.bench_function("dirac base kernel", |b| {
        b.iter(|| dirac_kernel(black_box(&l), &SpinStructure::base(), &DiracConfig::default()).unwrap())
    });
    let cfg = Lambda1Config { grid: 1000, ..Lambda1Config::default() };
    g.bench_function("lambda1 certificate grid 1000", |b| {
        b.iter(|| certify_lambda1_star(black_box(&l), &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, orbits, mode_solvers, certificates);
criterion_main!(benches);
