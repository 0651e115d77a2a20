use ahop_bench::uniform_patterns;
use ahop_core::hopfield::{retrieve_dense, retrieve_lowrank};
use ahop_core::{RetrievalConfig, Role};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn retrieval(c: &mut Criterion) {
    let cfg = RetrievalConfig::new(0.25, 1e-3).unwrap();
    let mut group = c.benchmark_group("retrieval");
    group.sample_size(10);
    for tau in [256usize, 1024, 4096] {
        let memory = uniform_patterns(tau, 4, 1.0, Role::Memory, 0, &[tau as u64, 0]).unwrap();
        let queries = uniform_patterns(tau, 4, 1.0, Role::Query, 0, &[tau as u64, 1]).unwrap();
        group.bench_with_input(BenchmarkId::new("dense", tau), &tau, |b, _| {
            b.iter(|| retrieve_dense(&memory, &queries, &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("lowrank", tau), &tau, |b, _| {
            b.iter(|| retrieve_lowrank(&memory, &queries, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, retrieval);
criterion_main!(benches);
