use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tension_core::catalog::{bit_ot, string_ot_pair, z_source};
use tension_core::oracle::{brute_force_support, GridSpec};
use tension_core::probkit::tension_of;
use tension_core::structure::intercepts_exact;
use tension_core::tension_opt::scalarized_min;
use tension_core::{DirectionWeights, OptimizerConfig};

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact");
    for l in 1..=3 {
        let e = string_ot_pair(l).unwrap();
        group.bench_with_input(
            BenchmarkId::new("intercepts_string_ot", l),
            &e.joint,
            |b, j| b.iter(|| intercepts_exact(black_box(j))),
        );
    }
    let e = string_ot_pair(2).unwrap();
    let seed = e.seed_region().unwrap();
    let w = seed.inner_points[0].witness.clone().unwrap();
    group.bench_function("tension_of_string_ot_2", |b| {
        b.iter(|| tension_of(black_box(&e.joint), &w))
    });
    group.finish();
}

fn numeric(c: &mut Criterion) {
    let mut group = c.benchmark_group("numeric");
    group.sample_size(10);
    let lam = DirectionWeights::new(1.0, 1.0, 1.0).unwrap();
    let cfg = OptimizerConfig {
        restarts: 8,
        ..OptimizerConfig::default()
    };
    let ot = bit_ot().unwrap();
    group.bench_function("scalarized_min_bit_ot", |b| {
        b.iter(|| scalarized_min(black_box(&ot.joint), &lam, &cfg).unwrap())
    });
    let z = z_source(0.25).unwrap();
    group.bench_function("oracle_z_source_q3_s8", |b| {
        b.iter(|| brute_force_support(black_box(&z.joint), &lam, &GridSpec::new(3, 8)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, exact, numeric);
criterion_main!(benches);
