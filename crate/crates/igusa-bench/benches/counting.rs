//! Brute force vs lifting vs stratification on the standard fixtures.
//! The CLI `bench` subcommand gives the same comparison with exact counts
//! in the report; this harness adds statistical timing.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigUint;

use igusa_bench::{hyperbolic_plane, odd_quadric, prime, singular_cubic};
use igusa_core::counting::{brute_force_count, lift_count, stratified_count, DEFAULT_BUDGET};

fn bench_algorithms(c: &mut Criterion) {
    let zero = BigUint::from(0u32);
    let cases = [
        ("xy-p2", hyperbolic_plane(), prime(2), 6u32),
        ("xy-p5", hyperbolic_plane(), prime(5), 4u32),
        ("xy+z2-p3", odd_quadric(), prime(3), 3u32),
        ("(x+y)^3-p3", singular_cubic(), prime(3), 4u32),
    ];
    let mut group = c.benchmark_group("counting");
    for (name, f, p, i) in &cases {
        group.bench_with_input(BenchmarkId::new("brute", name), &(), |b, ()| {
            b.iter(|| {
                brute_force_count(black_box(f), *p, *i, &zero, DEFAULT_BUDGET).expect("in budget")
            })
        });
        group.bench_with_input(BenchmarkId::new("lift", name), &(), |b, ()| {
            b.iter(|| lift_count(black_box(f), *p, *i, &zero))
        });
        group.bench_with_input(BenchmarkId::new("stratified", name), &(), |b, ()| {
            b.iter(|| {
                stratified_count(black_box(f), *p, *i, &zero, DEFAULT_BUDGET).expect("in budget")
            })
        });
    }
    group.finish();
}

fn bench_deep_lift(c: &mut Criterion) {
    let zero = BigUint::from(0u32);
    let f = hyperbolic_plane();
    let p = prime(2);
    let mut group = c.benchmark_group("lift-depth");
    for i in [8u32, 12, 16] {
        group.bench_with_input(BenchmarkId::from_parameter(i), &i, |b, &i| {
            b.iter(|| lift_count(black_box(&f), p, i, &zero))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_algorithms, bench_deep_lift);
criterion_main!(benches);
