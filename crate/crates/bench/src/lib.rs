//! Fixtures shared by the benchmarks.

use rieszwave::experiments::StudyConfig;
use rieszwave::noise::{sample_family_replica, BrownianFamily};
use rieszwave::norms::SpaceTimeSamples;
use rieszwave::SimConfig;

/// Desk geometry on a coarser grid and time step, so one run takes
/// milliseconds.
pub fn small_sim() -> SimConfig {
    let cfg = StudyConfig { grid: 16, fine_level: 8, window_side: 0.5, levels: vec![3, 4, 5], ..StudyConfig::default() };
    let mut sim = cfg.sim_config().expect("small config is valid");
    sim.set_snapshot_times(&[0.5, 1.0]).expect("times on the fine grid");
    sim
}

pub fn family(sim: &SimConfig) -> BrownianFamily {
    sample_family_replica(1, 0, sim.mode_count(), sim.fine_level, sim.horizon).expect("family")
}

/// A smooth space-time field on a `times × side³` lattice.
pub fn smooth_samples(times: usize, side: usize) -> SpaceTimeSamples {
    let ts: Vec<f64> = (0..times).map(|i| 0.25 + 0.75 * i as f64 / (times - 1) as f64).collect();
    let h = 1.0 / side as f64;
    let mut values = Vec::with_capacity(times * side.pow(3));
    for &t in &ts {
        for i in 0..side {
            for j in 0..side {
                for k in 0..side {
                    let (x, y, z) = (i as f64 * h, j as f64 * h, k as f64 * h);
                    values.push((3.0 * x + t).sin() * (2.0 * y).cos() + (z * t).sqrt());
                }
            }
        }
    }
    SpaceTimeSamples::new(ts, [0.0; 3], h, [side; 3], values).expect("consistent shape")
}
