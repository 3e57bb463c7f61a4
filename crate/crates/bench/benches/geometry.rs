use std::hint::black_box;

use cone_minkowski::identities::{divergence_theorem_check, mink2_report};
use cone_minkowski::spectral::{lambda1_neumann, polar_fan_mesh};
use cone_minkowski::{curvature, QuadratureRule, Resolution, Surface, TangentField};
use cone_minkowski_bench::bump_graph;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn pointwise(c: &mut Criterion) {
    let g = bump_graph(1.2);
    c.bench_function("curvature", |b| b.iter(|| curvature(&g, black_box(&[0.4, -0.3])).unwrap()));
}

fn identities(c: &mut Criterion) {
    let g = bump_graph(2.0);
    let mut group = c.benchmark_group("mink2");
    group.sample_size(10);
    for n_s in [16, 32, 64] {
        let rule = QuadratureRule::new(g.domain(), Resolution::new(4 * n_s, n_s, 8 * n_s)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n_s), &rule, |b, r| b.iter(|| mink2_report(&g, r).unwrap()));
    }
    group.finish();
    let rule = QuadratureRule::new(g.domain(), Resolution::new(64, 16, 128)).unwrap();
    c.bench_function("divergence_f2", |b| {
        b.iter(|| divergence_theorem_check(&g, &rule, &TangentField::Minkowski).unwrap())
    });
}

fn spectral(c: &mut Criterion) {
    let g = bump_graph(1.2);
    let mut group = c.benchmark_group("lambda1");
    group.sample_size(10);
    for rings in [8, 16, 32] {
        let mesh = polar_fan_mesh(g.domain(), rings).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(rings), &mesh, |b, m| {
            b.iter(|| lambda1_neumann(&g, m).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pointwise, identities, spectral);
criterion_main!(benches);
