use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use orthoalg_core::axioms::axiom_suite;
use orthoalg_core::gen::{trial_rng, Generator, SpectrumStyle};
use orthoalg_core::heisenberg::heisenberg_demo;
use orthoalg_core::oracle::differential::differential_sweep;
use orthoalg_core::spectral::proj_meet;
use orthoalg_core::{decompose, is_orthogonal, join, leq, meet, Observable, Tolerances};

const DIMS: [usize; 4] = [4, 8, 16, 32];

fn pairs(dim: usize) -> ((Observable, Observable), (Observable, Observable), (Observable, Observable)) {
    let g = Generator::new(dim, SpectrumStyle::Separated, Tolerances::default());
    let mut rng = trial_rng(1, dim as u64);
    (
        g.commuting_pair(&mut rng).unwrap(),
        g.noncommuting_pair(&mut rng).unwrap(),
        g.comparable_pair(&mut rng).unwrap(),
    )
}

fn spectral(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("decompose");
    for dim in DIMS {
        let (_, (a, _), _) = pairs(dim);
        group.bench_with_input(BenchmarkId::from_parameter(dim), a.hermitian(), |b, h| {
            b.iter(|| decompose(black_box(h), &tol).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("proj_meet");
    for dim in DIMS {
        let (_, (a, b), _) = pairs(dim);
        let (p, q) = (a.range_projection(), b.range_projection());
        group.bench_function(BenchmarkId::from_parameter(dim), |bch| {
            bch.iter(|| proj_meet(black_box(p), black_box(q), &tol).unwrap())
        });
    }
    group.finish();
}

fn relations(c: &mut Criterion) {
    let mut group = c.benchmark_group("relations");
    for dim in DIMS {
        let ((a, b), _, (x, y)) = pairs(dim);
        group.bench_function(BenchmarkId::new("is_orthogonal", dim), |bch| {
            bch.iter(|| is_orthogonal(black_box(&a), black_box(&b)).unwrap())
        });
        group.bench_function(BenchmarkId::new("leq", dim), |bch| {
            bch.iter(|| leq(black_box(&x), black_box(&y)).unwrap())
        });
    }
    group.finish();
}

fn lattice(c: &mut Criterion) {
    let mut group = c.benchmark_group("lattice");
    for dim in DIMS {
        let ((a, b), (p, q), (x, y)) = pairs(dim);
        group.bench_function(BenchmarkId::new("meet_commuting", dim), |bch| {
            bch.iter(|| meet(black_box(&a), black_box(&b)).unwrap())
        });
        group.bench_function(BenchmarkId::new("meet_noncommuting", dim), |bch| {
            bch.iter(|| meet(black_box(&p), black_box(&q)).unwrap())
        });
        group.bench_function(BenchmarkId::new("join_comparable", dim), |bch| {
            bch.iter(|| join(black_box(&x), black_box(&y)).unwrap())
        });
    }
    group.finish();
}

fn runs(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("runs");
    group.sample_size(10);
    group.bench_function("axiom_suite_100x6", |b| b.iter(|| axiom_suite(100, 6, 42).unwrap()));
    group.bench_function("differential_sweep_50x6", |b| b.iter(|| differential_sweep(50, 6, 7).unwrap()));
    group.bench_function("heisenberg_32", |b| b.iter(|| heisenberg_demo(32, 1.0, &tol).unwrap()));
    group.finish();
}

criterion_group!(benches, spectral, relations, lattice, runs);
criterion_main!(benches);
