use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dbar_core::dbar::{q_apply, FormField01, QOperator};
use dbar_core::linalg::{smallest_lanczos, IterOptions};
use dbar_core::{build_grid, integrate_real, PlanarRegion, ProductDomain, QuadOptions};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn operators(c: &mut Criterion) {
    let grid = build_grid(&ProductDomain::cube(1.0), 1.0 / 12.0).unwrap();
    let f = FormField01::random(&grid, &mut ChaCha8Rng::seed_from_u64(1));
    c.bench_function("q_apply cube h=1/12", |b| b.iter(|| q_apply(&grid, black_box(&f))));

    let small = build_grid(&ProductDomain::cube(1.0), 1.0 / 6.0).unwrap();
    let q = QOperator::new(&small);
    let opts = IterOptions::new(1e-9, 0);
    c.bench_function("lanczos cube h=1/6", |b| {
        b.iter(|| smallest_lanczos(q.dim(), |x| q.apply(x), black_box(&opts)).unwrap())
    });
}

fn quadrature(c: &mut Criterion) {
    let region = PlanarRegion::annular_sector(1e-4, 1.0, -std::f64::consts::PI, 0.0);
    let opts = QuadOptions::new(1e-8).with_hot_points(vec![Complex64::new(0.0, 0.0)]);
    c.bench_function("log-divergent half annulus", |b| {
        b.iter(|| integrate_real(&region, |z| 1.0 / z.norm_sqr(), black_box(&opts)).unwrap())
    });
}

criterion_group!(benches, operators, quadrature);
criterion_main!(benches);
