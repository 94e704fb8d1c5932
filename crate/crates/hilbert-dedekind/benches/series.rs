//! Rayon pool vs a one-thread pool on the hot series. Building with
//! `--no-default-features` swaps in the plain-iterator backend; the group
//! name records which one ran.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hilbert_dedekind::eta_engine::omega;
use hilbert_dedekind::field_arith::{make_field, ModMatrix};
use hilbert_dedekind::lfunctions::{geodesic_period, l_a};
use hilbert_dedekind::par;
use hilbert_dedekind::unit_domain::TruncationParams;
use num_complex::Complex64;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("1-thread", one), ("all-threads", all)]
}

fn series(c: &mut Criterion) {
    let f = make_field(7).unwrap();
    let a = ModMatrix::new(f.elem(-2, -1), f.elem(1, 1), f.elem(3, 1), f.elem(-2, -1)).unwrap();
    let z = [Complex64::new(0.1, 0.4), Complex64::new(-0.2, 0.5)];
    let tr = TruncationParams::with_tol(1e-11);
    let s = Complex64::new(2.0, 0.0);

    let mut g = c.benchmark_group(format!("series/{}", par::backend()));
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_with_input(BenchmarkId::new("omega", name), &(), |b, _| b.iter(|| pool.install(|| omega(&f, &z, 0, &tr).unwrap())));
        g.bench_with_input(BenchmarkId::new("l_a_1e4", name), &(), |b, _| b.iter(|| pool.install(|| l_a(&f, &a, s, 1e4, 50_000_000).unwrap())));
        g.bench_with_input(BenchmarkId::new("period_32", name), &(), |b, _| {
            b.iter(|| pool.install(|| geodesic_period(&f, &a, s, 32, 3e3, None, 1.0).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, series);
criterion_main!(benches);
