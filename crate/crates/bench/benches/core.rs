use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ordrecon_bench::sample;
use ordrecon_core::deck::{deck, invert_deck};
use ordrecon_core::enumerate::{enumerate_by_maximal_extension, next_level, DEFAULT_CAP};
use ordrecon_core::{canonical_cert, enumerate, UniverseFilter};

fn canonical(c: &mut Criterion) {
    let mut g = c.benchmark_group("canonical_cert");
    for n in [6, 8] {
        let posets = sample(n, 97);
        g.bench_with_input(BenchmarkId::from_parameter(n), &posets, |b, ps| {
            b.iter(|| {
                for p in ps {
                    black_box(canonical_cert(black_box(p)));
                }
            })
        });
    }
    g.finish();
}

fn decks(c: &mut Criterion) {
    let posets = sample(8, 97);
    c.bench_function("deck/n=8", |b| {
        b.iter(|| {
            for p in &posets {
                black_box(deck(black_box(p)));
            }
        })
    });
}

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate");
    g.sample_size(10);
    for n in [5, 6, 7] {
        let parents = enumerate(n - 1, UniverseFilter::All, DEFAULT_CAP).unwrap().certs;
        g.bench_with_input(BenchmarkId::new("orderly", n), &parents, |b, ps| {
            b.iter(|| next_level(black_box(ps)).len())
        });
        g.bench_with_input(BenchmarkId::new("maximal_extension", n), &n, |b, &n| {
            b.iter(|| enumerate_by_maximal_extension(black_box(n)).len())
        });
    }
    g.finish();
}

fn inversion(c: &mut Criterion) {
    let mut g = c.benchmark_group("invert_deck");
    g.sample_size(10);
    for n in [6, 7] {
        let decks: Vec<_> = sample(n, 41).iter().map(deck).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &decks, |b, ds| {
            b.iter(|| ds.iter().map(|d| invert_deck(black_box(d)).unwrap().len()).sum::<usize>())
        });
    }
    g.finish();
}

criterion_group!(benches, canonical, decks, enumeration, inversion);
criterion_main!(benches);
