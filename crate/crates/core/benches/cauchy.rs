use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mandelroots::{aberth_direct, aberth_fmm, FieldConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn points(n: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

// A one-thread pool stands in for the sequential path; build with
// --no-default-features to bench the rayon-free code itself.
fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        ("1-thread", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("default", rayon::ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn bench_fmm(c: &mut Criterion) {
    let cfg = FieldConfig::default();
    let mut g = c.benchmark_group("aberth_fmm");
    g.sample_size(10);
    for (name, pool) in pools() {
        for n in [4096, 32768] {
            let pts = points(n);
            g.bench_with_input(BenchmarkId::new(name, n), &pts, |b, pts| {
                pool.install(|| b.iter(|| aberth_fmm(black_box(pts), &cfg).unwrap()))
            });
        }
    }
    g.finish();
}

fn bench_direct(c: &mut Criterion) {
    let mut g = c.benchmark_group("aberth_direct");
    g.sample_size(10);
    for (name, pool) in pools() {
        let pts = points(4096);
        g.bench_with_input(BenchmarkId::new(name, 4096), &pts, |b, pts| {
            pool.install(|| b.iter(|| aberth_direct(black_box(pts)).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_fmm, bench_direct);
criterion_main!(benches);
