use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use riesz_lab::functions::{levi_min_eigenvalue, TestFunction};
use riesz_lab::measure::{harmonic_measure_exact, harmonic_measure_wos};
use riesz_lab::potential::pluriharmonic_measure;
use riesz_lab::verify::{check_riesz, riesz_constant};
use riesz_lab::{Complex64, Engine, FnSpec, ModelDomain, Scheme};

fn quadrature(c: &mut Criterion) {
    let mut g = c.benchmark_group("harmonic_measure_exact");
    for n in [1usize, 2] {
        let d = ModelDomain::ball(n);
        let z0 = vec![Complex64::new(0.3, 0.0); n];
        let shape = d.dilation(0.9).unwrap().shape;
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| harmonic_measure_exact(&shape, black_box(&z0), 4096).unwrap())
        });
    }
    g.finish();
    let ball = ModelDomain::ball(2);
    c.bench_function("pluriharmonic_measure_ball2", |b| {
        b.iter(|| pluriharmonic_measure(&ball, ball.z0(), black_box(0.1), 4096).unwrap())
    });
}

fn walk_on_spheres(c: &mut Criterion) {
    let d = ModelDomain::disc();
    let shape = d.shape();
    let z0 = [Complex64::new(0.5, 0.0)];
    let mut g = c.benchmark_group("wos_disc");
    g.sample_size(10);
    g.bench_function("10k_walks", |b| b.iter(|| harmonic_measure_wos(&shape, &z0, 10_000, 1e-6, black_box(3)).unwrap()));
    g.finish();
}

fn checkers(c: &mut Criterion) {
    let d = ModelDomain::disc();
    let f = TestFunction::build(FnSpec::poly(&[0.0, 1.0]), &d).unwrap();
    let levels = d.levels(Scheme::Dilation, &[0.5, 0.9, 0.99]).unwrap();
    let engine = Engine::default();
    let mut g = c.benchmark_group("check_riesz_disc");
    g.sample_size(10);
    g.bench_function("z_p2", |b| b.iter(|| check_riesz(&f, black_box(2.0), &d, &levels, &engine, true).unwrap()));
    g.finish();
    c.bench_function("riesz_constant_p7", |b| b.iter(|| riesz_constant(black_box(7.3)).unwrap()));
    let phi = |z: &[Complex64]| z.iter().map(|w| w.norm_sqr()).sum::<f64>().powf(0.75);
    let z = [Complex64::new(0.2, 0.1), Complex64::new(-0.3, 0.4)];
    c.bench_function("levi_min_eigenvalue_n2", |b| b.iter(|| levi_min_eigenvalue(&phi, black_box(&z), 1e-4)));
}

criterion_group!(benches, quadrature, walk_on_spheres, checkers);
criterion_main!(benches);
