use criterion::{black_box, criterion_group, criterion_main, Criterion};
use lfourth::characters::character_group;
use lfourth::divisorlab::{qdp_bruteforce, qdp_default_sweep, qdp_mainterm, voronoi_residual, SmoothWindow};
use lfourth::lfunc::{AfeEvaluator, KernelVariant, LValueCache};
use lfourth::moments::{moment_with_group, DIRECTION_A};
use lfourth::{ShiftTuple, C64};

fn shifts() -> ShiftTuple {
    ShiftTuple::from_array(DIRECTION_A.map(|z| z * 0.02))
}

fn characters(c: &mut Criterion) {
    c.bench_function("character_group q=1009", |b| b.iter(|| character_group(black_box(1009)).unwrap()));
}

fn lvalues(c: &mut Criterion) {
    let group = character_group(1009).unwrap();
    let s = C64::new(0.5, 3.0);
    c.bench_function("l-values all primitive q=1009", |b| {
        b.iter(|| {
            let cache = LValueCache::new();
            cache.fill(&group, &group.primitive_indices, black_box(s)).unwrap();
            cache.len()
        })
    });
}

fn moments(c: &mut Criterion) {
    let group = character_group(101).unwrap();
    let sh = shifts();
    c.bench_function("shifted moment q=101", |b| b.iter(|| moment_with_group(&group, black_box(2.0), &sh).unwrap()));
}

fn afe(c: &mut Criterion) {
    let group = character_group(7).unwrap();
    let chi = group.primitive().find(|x| x.parity == 0).unwrap().clone();
    let mut g = c.benchmark_group("afe");
    g.sample_size(10);
    g.bench_function("evaluator q=7 t=1", |b| {
        b.iter(|| {
            let ev = AfeEvaluator::new(7, 1.0, shifts(), KernelVariant::Gaussian, None).unwrap();
            ev.residual(&chi).unwrap()
        })
    });
    g.finish();
}

fn divisorlab(c: &mut Criterion) {
    let inst = qdp_default_sweep()[0];
    let mut g = c.benchmark_group("divisorlab");
    g.sample_size(10);
    g.bench_function("qdp brute force", |b| b.iter(|| qdp_bruteforce(black_box(&inst)).unwrap()));
    g.bench_function("qdp main term", |b| b.iter(|| qdp_mainterm(black_box(&inst)).unwrap()));
    g.bench_function("voronoi c=3 N=1000", |b| {
        b.iter(|| voronoi_residual(1, black_box(3), SmoothWindow::Bump, 1000.0).unwrap())
    });
    g.finish();
}

criterion_group!(benches, characters, lvalues, moments, afe, divisorlab);
criterion_main!(benches);
