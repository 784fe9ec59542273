use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use outerfn::experiments::{random_piecewise_weight, three_arc_deltas};
use outerfn::factorization::{coupled_weight_sampled, normalize, solve_psi};
use outerfn::fourier::pplus_energy;
use outerfn::{factor_at_zero, FactorOptions, SolveMethod};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn psi_solvers(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = random_piecewise_weight(&mut rng, 2).unwrap();
    let delta = normalize(&w).unwrap().delta;
    let mut group = c.benchmark_group("solve_psi");
    for m in [64usize, 256] {
        for (name, method) in [("direct", SolveMethod::Direct), ("cg", SolveMethod::ConjugateGradient)] {
            group.bench_with_input(BenchmarkId::new(name, m), &m, |b, &m| {
                b.iter(|| solve_psi(black_box(&delta), m, method).unwrap())
            });
        }
    }
    group.bench_function(BenchmarkId::new("cg", 4096), |b| {
        b.iter(|| solve_psi(black_box(&delta), 4096, SolveMethod::ConjugateGradient).unwrap())
    });
    group.finish();
}

fn factorization(c: &mut Criterion) {
    let mut group = c.benchmark_group("factor_at_zero");
    group.sample_size(20);
    let sampled = coupled_weight_sampled(1.0, 1 << 12).unwrap();
    group.bench_function("coupled G=4096 M=256", |b| {
        b.iter(|| factor_at_zero(black_box(&sampled), FactorOptions::with_truncation(256)).unwrap())
    });
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let piecewise = random_piecewise_weight(&mut rng, 2).unwrap();
    for m in [256usize, 4096] {
        group.bench_with_input(BenchmarkId::new("piecewise extrapolated", m), &m, |b, &m| {
            b.iter(|| factor_at_zero(black_box(&piecewise), FactorOptions::extrapolated(m)).unwrap())
        });
    }
    group.finish();
}

fn energy(c: &mut Criterion) {
    let (delta, _) = three_arc_deltas().unwrap();
    let mut group = c.benchmark_group("pplus_energy");
    for n in [1_000u64, 1_000_000] {
        group.bench_with_input(BenchmarkId::new("three-arc", n), &n, |b, &n| {
            b.iter(|| pplus_energy(black_box(&delta), n).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, psi_solvers, factorization, energy);
criterion_main!(benches);
