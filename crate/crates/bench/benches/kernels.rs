use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use rieszwave::lattice::{Fft3, TorusGrid};
use rieszwave::norms::{frac_sobolev, holder_norm, shrinking_set};
use rieszwave::solver::{run_lanes, LaneSpec};
use rieszwave::wavekernel::{mu_integral, MuKind, MuQuad};
use rieszwave_bench::{family, small_sim, smooth_samples};

fn fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft_forward_real");
    for n in [16, 32] {
        let grid = TorusGrid::new(4.0, n).unwrap();
        let mut plan = Fft3::new(&grid);
        let x: Vec<f64> = (0..grid.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| plan.forward_real(black_box(x))));
    }
    group.finish();
}

fn stepper(c: &mut Criterion) {
    let sim = small_sim();
    let fam = family(&sim);
    let mut group = c.benchmark_group("run_lanes_n16_q8");
    group.sample_size(10);
    group.bench_function("full", |b| b.iter(|| run_lanes(&sim, Some(&fam), &[], &[LaneSpec::full()]).unwrap()));
    let lanes: Vec<LaneSpec> = [3, 4, 5].iter().map(|&n| LaneSpec::regularized().with_minus().at_level(n)).collect();
    group.bench_function("regularized_x3_minus", |b| b.iter(|| run_lanes(&sim, Some(&fam), &[], &lanes).unwrap()));
    group.finish();
}

fn mu(c: &mut Criterion) {
    let mut group = c.benchmark_group("mu_integral");
    group.sample_size(10);
    let quad = MuQuad::default();
    for which in [MuKind::One, MuKind::Two, MuKind::Four] {
        group.bench_function(format!("mu{}", which.index()), |b| {
            b.iter(|| mu_integral(which, 1.0, [0.0; 3], [0.2, 0.0, 0.0], 1.0, 0.4, quad).unwrap())
        });
    }
    group.finish();
}

fn norms(c: &mut Criterion) {
    let g = smooth_samples(4, 6);
    c.bench_function("holder_norm_exhaustive_4x6^3", |b| b.iter(|| holder_norm(black_box(&g), 0.3).unwrap()));
    let sim = small_sim();
    let set = shrinking_set(&sim.grid, &sim.window, 1.0, sim.horizon).unwrap();
    let v: Vec<f64> = (0..set.len()).map(|i| (i as f64 * 0.1).cos()).collect();
    c.bench_function("frac_sobolev_window", |b| b.iter(|| frac_sobolev(black_box(&v), &set, 0.05, 8.0).unwrap()));
}

criterion_group!(benches, fft, stepper, mu, norms);
criterion_main!(benches);
