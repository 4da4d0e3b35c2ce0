use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use sicwfi::mode_solver::{count_guided_modes, CrossSectionGeometry, ModeSolverConfig};
use sicwfi::photon_stats::{
    correlate, fit_odmr, fit_rabi, odmr_spectrum, rabi_trace, simulate_emitter, Background, EmitterParams,
};
use sicwfi::raman_strain::{forward_shifts, shifts_to_stress, DeformationPotentials, PeakShifts};
use sicwfi::spin_strain::{build_hamiltonian, odmr_frequencies, DeformationTensor, GroundStateParams};

fn photon(c: &mut Criterion) {
    let stream = simulate_emitter(&EmitterParams {
        duration_ps: 200_000_000_000,
        background: Background::Rate { cps: 1e4 },
        ..Default::default()
    })
    .unwrap();
    c.bench_function("correlate_200ms", |b| b.iter(|| correlate(black_box(&stream), 0, 1, 500_000, 1_000).unwrap()));

    let f: Vec<f64> = (0..161).map(|k| 31.6 + 0.5 * k as f64).collect();
    let y = odmr_spectrum(&f, 71.6, 13.0, 0.05, 1.0, 0.00025, 1);
    c.bench_function("fit_odmr", |b| b.iter(|| fit_odmr(black_box(&f), black_box(&y)).unwrap()));

    let t: Vec<f64> = (0..300).map(|k| 0.004 * k as f64).collect();
    let y = rabi_trace(&t, 6.65, 0.234, 0.1, 0.0, 1.0, 0.003, 1);
    c.bench_function("fit_rabi", |b| b.iter(|| fit_rabi(black_box(&t), black_box(&y)).unwrap()));
}

fn spin_and_raman(c: &mut Criterion) {
    let params = GroundStateParams::default();
    let strain = DeformationTensor::new([[1e-4, 2e-5, 0.0], [2e-5, -3e-5, 1e-5], [0.0, 1e-5, 5e-5]]).unwrap();
    c.bench_function("spin_odmr", |b| {
        b.iter(|| odmr_frequencies(&build_hamiltonian(&params, black_box(&strain), [0.0, 0.0, 1e-3]).unwrap()))
    });

    let potentials = DeformationPotentials::default();
    c.bench_function("raman_round_trip", |b| {
        b.iter_batched(
            || forward_shifts(0.3, -0.1, &potentials),
            |s| shifts_to_stress(&PeakShifts::exact(s), &potentials).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn modes(c: &mut Criterion) {
    let geometry = CrossSectionGeometry::new(490e-9, 36.0).unwrap();
    let config = ModeSolverConfig { spacing: 25e-9, subsamples: 2, max_modes: 2, ..Default::default() };
    let mut group = c.benchmark_group("mode_solver");
    group.sample_size(10);
    group.bench_function("count_guided_coarse", |b| b.iter(|| count_guided_modes(&geometry, 960e-9, &config).unwrap()));
    group.finish();
}

criterion_group!(benches, photon, spin_and_raman, modes);
criterion_main!(benches);
