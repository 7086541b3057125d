use std::hint::black_box;

use chainswap::operator::expm;
use chainswap::{assemble, Scenario};
use chainswap_bench::{first_window, scenario};
use criterion::{criterion_group, criterion_main, Criterion};

fn generator(c: &mut Criterion) {
    let (spec, duration) = first_window();
    c.bench_function("assemble 3 spins", |b| b.iter(|| assemble(black_box(&spec)).unwrap()));
    let gen = assemble(&spec).unwrap().gen;
    c.bench_function("expm 64x64", |b| b.iter(|| expm(black_box(&gen), duration).unwrap()));
}

fn transport(c: &mut Criterion) {
    let mut g = c.benchmark_group("transport");
    g.sample_size(10);
    let s = scenario();
    g.bench_function("evaluate", |b| b.iter(|| black_box(&s).evaluate().unwrap()));
    let id = Scenario::identical_default();
    g.bench_function("evaluate identical", |b| b.iter(|| black_box(&id).evaluate().unwrap()));
    g.finish();
}

criterion_group!(benches, generator, transport);
criterion_main!(benches);
