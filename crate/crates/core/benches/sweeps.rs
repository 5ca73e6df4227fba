//! Parallel against sequential timings for the three hot loops.
//!
//! The sequential variant runs the same code inside a one-thread pool, so both
//! measure identical work. Building with `--no-default-features` makes both
//! variants sequential.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ellreg_core::eisenstein::{FinDivisor, GeodesicIntegrator, UnimodularMatrix};
use ellreg_core::characters::even_nontrivial_characters;
use ellreg_core::elliptic::CurveModel;
use ellreg_core::lseries::{twisted_lambda_table, ModularFormData};
use ellreg_core::mahler::{boyd_polynomial_77, mahler_measure, MahlerControl};
use ellreg_core::par::with_jobs;
use ellreg_core::specialfns::SeriesControl;

const BACKENDS: [(&str, usize); 2] = [("sequential", 1), ("parallel", 0)];

fn geodesic_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("geodesic_table");
    group.sample_size(10).measurement_time(Duration::from_secs(8));
    let chi = even_nontrivial_characters(11).unwrap().remove(0);
    let eta = FinDivisor::from_character(&chi);
    let conj = FinDivisor::from_character(&chi.conj());
    let g = UnimodularMatrix::new(0, -1, 1, 3).unwrap();
    for (name, jobs) in BACKENDS {
        group.bench_function(BenchmarkId::new(name, 11), |b| {
            b.iter(|| {
                with_jobs(jobs, || {
                    let integ = GeodesicIntegrator::rho_arc(11, 1e-12, SeriesControl::default()).unwrap();
                    integ.integrate_pullback(&eta, &conj, &g).unwrap()
                })
            })
        });
    }
    group.finish();
}

fn mahler_panels(c: &mut Criterion) {
    let mut group = c.benchmark_group("mahler_panels");
    group.sample_size(10).measurement_time(Duration::from_secs(8));
    let p = boyd_polynomial_77();
    let ctl = MahlerControl::default();
    for (name, jobs) in BACKENDS {
        group.bench_function(name, |b| b.iter(|| with_jobs(jobs, || mahler_measure(&p, &ctl).unwrap())));
    }
    group.finish();
}

fn twisted_lambda_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("twisted_lambda");
    group.sample_size(10).measurement_time(Duration::from_secs(8));
    for (label, curve) in [("11a", CurveModel::x1_11()), ("17a", CurveModel::conductor_17())] {
        let form = ModularFormData::from_curve(&curve, 4000).unwrap();
        let ctl = SeriesControl::default();
        for (name, jobs) in BACKENDS {
            group.bench_function(BenchmarkId::new(name, label), |b| {
                b.iter(|| with_jobs(jobs, || twisted_lambda_table(&form, &ctl).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, geodesic_table, mahler_panels, twisted_lambda_sweep);
criterion_main!(benches);
