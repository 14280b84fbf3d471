use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sqzmetro_bench::representative_configs;
use sqzmetro_core::metrology::{
    classical_fisher, oracle_qfi, qfi, threshold_gamma_sens, MzObservables,
};
use sqzmetro_core::{Truncation, WorkingPoint};

fn analytic(c: &mut Criterion) {
    let configs = representative_configs(1.0, 2.0, 0.8);
    let obs = MzObservables::at(WorkingPoint::default().phi());
    c.bench_function("qfi_analytic", |b| {
        b.iter(|| configs.iter().map(|cfg| qfi(black_box(cfg)).unwrap()).sum::<f64>())
    });
    c.bench_function("sensitivity_analytic", |b| {
        b.iter(|| {
            configs
                .iter()
                .map(|cfg| obs.sensitivity(black_box(cfg)).unwrap().s)
                .sum::<f64>()
        })
    });
    c.bench_function("mz_observables_build", |b| {
        b.iter(|| MzObservables::at(black_box(1.2)))
    });
}

fn oracle(c: &mut Criterion) {
    let configs = representative_configs(0.5, 1.0, 0.8);
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("qfi", |b| {
        b.iter(|| {
            configs
                .iter()
                .map(|cfg| oracle_qfi(black_box(cfg), Truncation::Auto).unwrap())
                .sum::<f64>()
        })
    });
    group.bench_function("classical_fisher", |b| {
        b.iter(|| {
            classical_fisher(black_box(&configs[0]), WorkingPoint::default(), Truncation::Auto)
                .unwrap()
        })
    });
    group.finish();
}

fn threshold(c: &mut Criterion) {
    let mut group = c.benchmark_group("threshold");
    group.sample_size(10);
    group.bench_function("sensitivity_r1_eta08", |b| {
        b.iter(|| threshold_gamma_sens(black_box(1.0), 0.8))
    });
    group.finish();
}

criterion_group!(benches, analytic, oracle, threshold);
criterion_main!(benches);
