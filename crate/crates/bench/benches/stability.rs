use antiphase_core::oracle::full_monodromy_exponents;
use antiphase_core::*;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn uniform_spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectrum_uniform");
    for n in [8, 64, 1024] {
        let p = RingParams::uniform(n, 0.5, 1.0, 2.0).unwrap();
        group.bench_with_input(BenchmarkId::new("closed_form", n), &p, |b, p| {
            b.iter(|| spectrum_uniform(p, black_box(0.3)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dense_blocks", n), &p, |b, p| {
            b.iter(|| stability::spectrum_uniform_numeric(p, black_box(0.3)).unwrap())
        });
    }
    group.finish();
}

fn floquet(c: &mut Criterion) {
    let p = RingParams::new(8, 0.5, 1.0, 2.0, 0.2).unwrap();
    c.bench_function("floquet_block/k1", |b| {
        b.iter(|| floquet_block(&p, 1, 0.0, black_box(DEFAULT_FLOQUET_STEPS)).unwrap())
    });
    c.bench_function("max_transverse_floquet/n8", |b| {
        b.iter(|| max_transverse_floquet(&p, black_box(DEFAULT_FLOQUET_STEPS)).unwrap())
    });
    let mut slow = c.benchmark_group("full_monodromy");
    slow.sample_size(10);
    slow.bench_function("n8", |b| {
        b.iter(|| full_monodromy_exponents(&p, 0.0, black_box(DEFAULT_FLOQUET_STEPS)).unwrap())
    });
    slow.finish();
}

fn orbit(c: &mut Criterion) {
    let p = RingParams::new(8, 0.1, 1.0, 2.0, 0.2).unwrap();
    let x0 = decoupled_polar(&p, DecoupledPoint::new(0.0, 1.0)).unwrap();
    c.bench_function("integrate_orbit/n8_1000_steps", |b| {
        b.iter(|| integrate_orbit(&p, &x0, 0.01, black_box(1000), 1000, |_| {}).unwrap())
    });
}

criterion_group!(benches, uniform_spectrum, floquet, orbit);
criterion_main!(benches);
