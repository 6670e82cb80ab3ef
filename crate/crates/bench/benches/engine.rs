use std::hint::black_box;

use bismut_bench::fixture;
use bismut_core::classify::classify;
use bismut_core::curvature::riemann;
use bismut_core::identities::{full_suite, Tolerances};
use bismut_core::sampling::sample_points;
use bismut_core::string_eq::{string_residual, Dilaton};
use bismut_core::{curvature_pack, Flavor};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn pointwise(c: &mut Criterion) {
    let mut group = c.benchmark_group("pointwise");
    for name in ["hopf_standard", "su2xu1", "conf_torus_6"] {
        let (geo, p) = fixture(name);
        group.bench_with_input(BenchmarkId::new("torsion", name), &p, |b, p| {
            b.iter(|| geo.torsion(black_box(p)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("lee_form", name), &p, |b, p| {
            b.iter(|| geo.lee_form(black_box(p)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("bismut_riemann", name), &p, |b, p| {
            b.iter(|| riemann(&geo, Flavor::Bismut, black_box(p)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("curvature_pack", name), &p, |b, p| {
            b.iter(|| curvature_pack(&geo, black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("suites");
    group.sample_size(10);
    let tol = Tolerances::default();
    for name in ["hopf_standard", "conf_torus_6"] {
        let (geo, _) = fixture(name);
        let pts = sample_points(geo.manifold().domain(), 8, 0, 0.05);
        group.bench_function(BenchmarkId::new("identities_8pt", name), |b| {
            b.iter(|| full_suite(&geo, black_box(&pts), &tol).unwrap())
        });
        let flags = classify(&geo, &pts, tol.classify).unwrap();
        group.bench_function(BenchmarkId::new("string_8pt", name), |b| {
            b.iter(|| string_residual(&geo, &Dilaton::Constant, black_box(&pts), &tol, &flags).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pointwise, suites);
criterion_main!(benches);
