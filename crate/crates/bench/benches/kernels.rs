use std::hint::black_box;

use cocycle_core::avalanche::{ap_check, random_hyperbolic_chain};
use cocycle_core::cocycle::{almost_mathieu, Cocycle};
use cocycle_core::lyapunov::{l_prime_n, QuadratureSpec};
use cocycle_core::torus::{min_dot_norm, Frequency};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn amo() -> Cocycle {
    Cocycle::new(almost_mathieu(3.0, 0.0, 0.5).unwrap(), Frequency::golden()).unwrap()
}

fn iterate_log_norm(c: &mut Criterion) {
    let cocycle = amo();
    let mut group = c.benchmark_group("iterate_log_norm");
    for n in [100u64, 1000, 10_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| cocycle.iterate_log_norm(n, black_box(&[0.123])))
        });
    }
    group.finish();
}

fn l_prime(c: &mut Criterion) {
    let cocycle = amo();
    let mut group = c.benchmark_group("l_prime_n");
    group.sample_size(10);
    for m in [256usize, 1024] {
        let q = QuadratureSpec::uniform(m);
        group.bench_with_input(BenchmarkId::new("N=100", m), &q, |b, q| {
            b.iter(|| l_prime_n(&cocycle, 100, q).unwrap())
        });
    }
    group.finish();
}

fn diophantine_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("min_dot_norm");
    let one = Frequency::golden();
    let two = Frequency::new(vec![0.6180339887498949, 0.41421356237309515]).unwrap();
    group.bench_function("d=1,K=100000", |b| {
        b.iter(|| min_dot_norm(&one, black_box(100_000)).unwrap())
    });
    group.bench_function("d=2,K=100", |b| b.iter(|| min_dot_norm(&two, black_box(100)).unwrap()));
    group.finish();
}

fn avalanche(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let chain = random_hyperbolic_chain(&mut rng, 100, 1e4, 101.0 / 99.0);
    c.bench_function("ap_check/n=100", |b| {
        b.iter(|| ap_check(black_box(&chain), 10.0).unwrap())
    });
}

criterion_group!(benches, iterate_log_norm, l_prime, diophantine_scan, avalanche);
criterion_main!(benches);
