//! Hot paths: support queries, perimeter sums, Whitney refinement, and the
//! translate search behind the asymmetry index.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use wulfflab::fixtures;
use wulfflab::whitney::decompose;
use wulfflab::{anisotropic_perimeter, asymmetry, v2, GeomSet};

fn bench_support(c: &mut Criterion) {
    let k = fixtures::disc_body(256);
    c.bench_function("support 256-gon", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..64 {
                let th = 0.1 * i as f64;
                acc += k.support2(black_box(v2(th.cos(), th.sin())));
            }
            acc
        })
    });
}

fn bench_perimeter(c: &mut Criterion) {
    let k = fixtures::square_body();
    let e = fixtures::seeded_star(3, 64, 0.3);
    c.bench_function("perimeter star-64 vs square", |b| {
        b.iter(|| anisotropic_perimeter(black_box(&e), &k).unwrap())
    });
}

fn bench_whitney(c: &mut Criterion) {
    let dom = fixtures::disc();
    c.bench_function("whitney disc level 8", |b| {
        b.iter(|| decompose(black_box(&dom), 8).unwrap().cubes.len())
    });
}

fn bench_asymmetry(c: &mut Criterion) {
    let k = fixtures::disc_body(128);
    let e = fixtures::seeded_star(5, 32, 0.2);
    c.bench_function("asymmetry star-32 vs disc-128", |b| {
        b.iter(|| asymmetry(black_box(&e), &k).unwrap().value)
    });
}

fn bench_symm_diff(c: &mut Criterion) {
    let GeomSet::Polygon(a) = fixtures::seeded_star(8, 48, 0.25) else { unreachable!() };
    let GeomSet::Polygon(b) = fixtures::seeded_star(9, 48, 0.25) else { unreachable!() };
    c.bench_function("symm diff star-48 pair", |bch| {
        bch.iter(|| wulfflab::geomset::polygon::symm_diff_area(black_box(&a), &b))
    });
}

criterion_group!(
    benches,
    bench_support,
    bench_perimeter,
    bench_whitney,
    bench_asymmetry,
    bench_symm_diff
);
criterion_main!(benches);
