use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use rieszlab::generators::{gen_four_corners, gen_segment};
use rieszlab::riesz::riesz_apply_with;
use rieszlab::treecode::{build_tree, treecode_apply_with, TreecodeParams};
use rieszlab::{Exec, KernelConfig};

fn direct(c: &mut Criterion) {
    let mut group = c.benchmark_group("direct");
    group.sample_size(10);
    for n in [2048usize, 8192] {
        let mu = gen_segment(n, 2).unwrap();
        let cfg = KernelConfig::truncated(1, 4.0 * mu.resolution()).unwrap();
        let f = vec![1.0; n];
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &n, |b, _| {
                b.iter(|| riesz_apply_with(exec, &mu, black_box(&f), &cfg, mu.coords()).unwrap())
            });
        }
    }
    group.finish();
}

fn treecode(c: &mut Criterion) {
    let mut group = c.benchmark_group("treecode");
    group.sample_size(10);
    let mu = gen_four_corners(7).unwrap();
    let cfg = KernelConfig::truncated(1, 4.0 * mu.resolution()).unwrap();
    let f = vec![1.0; mu.len()];
    for order in [0usize, 4] {
        let params = TreecodeParams::new(0.3, 32, order).unwrap();
        let tree = build_tree(&mu, &params);
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), order), &order, |b, _| {
                b.iter(|| treecode_apply_with(exec, &mu, black_box(&f), &cfg, &tree, &params, mu.coords()).unwrap())
            });
        }
    }
    group.bench_function("direct-baseline", |b| {
        b.iter(|| riesz_apply_with(Exec::default(), &mu, black_box(&f), &cfg, mu.coords()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, direct, treecode);
criterion_main!(benches);
