use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ffgate::gate::{spectral_sweep, sweep_transmittance};
use ffgate::par::Execution;
use ffgate::{GateConfig, SpectralModel};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn transmittance_sweep(c: &mut Criterion) {
    let cfg = GateConfig::experiment(0.5);
    let mut group = c.benchmark_group("sweep_transmittance");
    for points in [16usize, 256] {
        let grid: Vec<f64> = (0..points).map(|k| 0.15 + 0.85 * k as f64 / (points - 1) as f64).collect();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, points), &grid, |b, grid| {
                b.iter(|| sweep_transmittance(black_box(&cfg), black_box(grid), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let cfg = GateConfig::experiment(0.5);
    let model = SpectralModel { delta_tau: 2.78e-15, ..SpectralModel::default() };
    let mut group = c.benchmark_group("spectral_sweep");
    for bins in [64usize, 1024] {
        let grid: Vec<f64> = (0..bins).map(|k| 2e12 * (k + 1) as f64 / bins as f64).collect();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, bins), &grid, |b, grid| {
                b.iter(|| spectral_sweep(black_box(&cfg), &model, black_box(grid), exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, transmittance_sweep, spectrum);
criterion_main!(benches);
