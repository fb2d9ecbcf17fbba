use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polyergo::averaging::{average_direct, average_transform, multiplier_m, phi};
use polyergo::circle::{nu, NuOptions};
use polyergo::expsum::max_gauss_modulus;
use polyergo::variation::variation_exact;
use polyergo::{LatticeFunction, MultiIndexSet, QuadratureSpec, RealSequence, TorusPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quadratic() -> MultiIndexSet {
    MultiIndexSet::build(1, 2).unwrap()
}

fn sparse_input(seed: u64) -> LatticeFunction<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = LatticeFunction::zeros(vec![0, 0], vec![63, 63]).unwrap();
    for _ in 0..40 {
        f.set(&[rng.gen_range(0..64), rng.gen_range(0..64)], rng.gen_range(-1.0..1.0))
            .unwrap();
    }
    f
}

fn averaging(c: &mut Criterion) {
    let g = quadratic();
    let f = sparse_input(1);
    let mut group = c.benchmark_group("average");
    for n in [2u64, 8] {
        group.bench_with_input(BenchmarkId::new("direct", n), &n, |b, &n| {
            b.iter(|| average_direct(black_box(&f), n, &g).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("transform", n), &n, |b, &n| {
            b.iter(|| average_transform(black_box(&f), n, &g, None).unwrap())
        });
    }
    group.finish();
}

fn multipliers(c: &mut Criterion) {
    let g = quadratic();
    let quad = QuadratureSpec::default();
    let xi = TorusPoint::from_fractions(&[5, 11], 193).unwrap();
    let mut group = c.benchmark_group("multiplier");
    for n in [256u64, 4096] {
        group.bench_with_input(BenchmarkId::new("m", n), &n, |b, &n| {
            b.iter(|| multiplier_m(black_box(&xi), n, &g).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("phi", n), &n, |b, &n| {
            b.iter(|| phi(black_box(&[3.0 / n as f64, 7.0 / (n * n) as f64]), n, &g, &quad).unwrap())
        });
    }
    let near = TorusPoint::from_f64(&[1.0 / 3.0 + 1e-6, 2.0 / 3.0]).unwrap();
    group.bench_function("nu", |b| b.iter(|| nu(black_box(&near), 1024, &NuOptions::default(), &g).unwrap()));
    group.finish();
}

fn gauss(c: &mut Criterion) {
    let g = quadratic();
    let mut group = c.benchmark_group("gauss_max");
    for q in [31i64, 127] {
        group.bench_with_input(BenchmarkId::from_parameter(q), &q, |b, &q| {
            b.iter(|| max_gauss_modulus(black_box(q), &g).unwrap())
        });
    }
    group.finish();
}

fn variation(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut group = c.benchmark_group("variation");
    for len in [64usize, 512] {
        let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = RealSequence::from_values(&v);
        group.bench_with_input(BenchmarkId::from_parameter(len), &a, |b, a| {
            b.iter(|| variation_exact(black_box(a), 2.5).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, averaging, multipliers, gauss, variation);
criterion_main!(benches);
