use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use vglab::geometry::{ball_volume, curvature_lp_integral_on, CurvatureQuantity, ModelMetric};
use vglab::par;
use vglab::profile::QuadratureSpec;

fn volume_sweep(c: &mut Criterion) {
    let m = ModelMetric::bump_cone(3, 0.04, 2.0).unwrap();
    let spec = QuadratureSpec::default();
    let radii: Vec<f64> = (1..=256).map(|i| 0.05 * i as f64).collect();
    let mut g = c.benchmark_group("ball_volume_sweep");
    g.bench_function(BenchmarkId::new("map", radii.len()), |b| {
        b.iter(|| par::map(black_box(&radii), |&r| ball_volume(&m, r, &spec).unwrap()))
    });
    g.bench_function(BenchmarkId::new("map_serial", radii.len()), |b| {
        b.iter(|| par::map_serial(black_box(&radii), |&r| ball_volume(&m, r, &spec).unwrap()))
    });
    g.finish();
}

fn curvature_integral_sweep(c: &mut Criterion) {
    let m = ModelMetric::truncated_hyperbolic(3, 4.0, 5.0).unwrap();
    let spec = QuadratureSpec::default();
    let exponents: Vec<f64> = (0..64).map(|i| 1.0 + 3.0 * i as f64 / 63.0).collect();
    let integral = |&p: &f64| curvature_lp_integral_on(&m, p, CurvatureQuantity::Ricm, 0.0, 5.0, &spec).unwrap();
    let mut g = c.benchmark_group("curvature_lp_sweep");
    g.bench_function(BenchmarkId::new("map", exponents.len()), |b| b.iter(|| par::map(black_box(&exponents), integral)));
    g.bench_function(BenchmarkId::new("map_serial", exponents.len()), |b| {
        b.iter(|| par::map_serial(black_box(&exponents), integral))
    });
    g.finish();
}

criterion_group!(benches, volume_sweep, curvature_integral_sweep);
criterion_main!(benches);
