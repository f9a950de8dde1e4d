use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rieszlab::flow::catalog::two_kernels;
use rieszlab::flow::{densities, Quadrature};
use rieszlab::par;
use rieszlab::riesz::sandwich_check;
use rieszlab::subeq::Subequation;

fn run<R>(parallel: bool, f: impl FnOnce() -> R) -> R {
    if parallel {
        f()
    } else {
        par::force_sequential(f)
    }
}

fn bench_densities(c: &mut Criterion) {
    let mut group = c.benchmark_group("densities");
    group.sample_size(10);
    let u = two_kernels(4, 3.0, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    let q = Quadrature::default_for(4).unwrap();
    let radii: Vec<f64> = (1..=6).map(|j| 2f64.powi(-j)).collect();
    for parallel in [true, false] {
        let label = if parallel { "parallel" } else { "sequential" };
        group.bench_with_input(BenchmarkId::new(label, "two-kernels n=4"), &parallel, |b, &p| {
            b.iter(|| run(p, || black_box(densities(u.as_ref(), &[0.0; 4], 3.0, &radii, &q).unwrap())))
        });
    }
    group.finish();
}

fn bench_sandwich(c: &mut Criterion) {
    let mut group = c.benchmark_group("sandwich");
    let f = Subequation::sigma_k(6, 2).unwrap();
    for parallel in [true, false] {
        let label = if parallel { "parallel" } else { "sequential" };
        group.bench_with_input(BenchmarkId::new(label, "sigma-2 n=6"), &parallel, |b, &p| {
            b.iter(|| run(p, || black_box(sandwich_check(&f, 3.0, 2000, 1).unwrap())))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_densities, bench_sandwich);
criterion_main!(benches);
