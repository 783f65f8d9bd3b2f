use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{sample_family_replica, BrownianFamily};
use crate::norms::{shrinking_set, SpaceTimeSamples};
use crate::solver::{PathSolution, SimConfig, SnapshotBox};

use super::config::StudyConfig;

pub(crate) fn family(study: &StudyConfig, sim: &SimConfig, replica: u64) -> Result<BrownianFamily> {
    sample_family_replica(study.seed, replica, sim.mode_count(), sim.fine_level, sim.horizon)
}

/// Runs `work` for every replica on the rayon pool and hands the results to
/// `fold` in replica order, a batch at a time, so aggregates do not depend
/// on scheduling and memory stays bounded.
pub(crate) fn for_replicas<T: Send>(
    replicas: usize,
    work: impl Fn(u64) -> Result<T> + Sync,
    mut fold: impl FnMut(u64, T) -> Result<()>,
) -> Result<()> {
    let batch = (4 * rayon::current_num_threads()).max(4);
    let ids: Vec<u64> = (0..replicas as u64).collect();
    for chunk in ids.chunks(batch) {
        let out: Vec<Result<T>> = chunk.par_iter().map(|&r| work(r)).collect();
        for (&r, res) in chunk.iter().zip(out) {
            fold(r, res?)?;
            log::debug!("replica {r} done");
        }
        log::info!("{} of {replicas} replicas done", chunk.last().map_or(0, |r| r + 1));
    }
    Ok(())
}

/// Sorted, de-duplicated union of time lists, all on the fine grid.
pub(crate) fn snapshot_union(sim: &mut SimConfig, lists: &[&[f64]]) -> Result<Vec<f64>> {
    let mut steps: Vec<usize> = Vec::new();
    for l in lists {
        for &t in *l {
            steps.push(sim.step_of(t)?);
        }
    }
    steps.sort_unstable();
    steps.dedup();
    sim.snapshot_steps = steps.clone();
    Ok(steps.iter().map(|&s| sim.time_of(s)).collect())
}

/// `n` uniformly spaced times from `t0` to `T` inclusive.
pub(crate) fn window_times(sim: &SimConfig, count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::config("time_samples must be at least 2"));
    }
    let times: Vec<f64> =
        (0..count).map(|i| sim.t0 + (sim.horizon - sim.t0) * i as f64 / (count - 1) as f64).collect();
    for &t in &times {
        sim.step_of(t).map_err(|_| Error::config(format!("window time {t} is not on the fine grid")))?;
    }
    Ok(times)
}

/// Lattice box of the cells of `K` at spatial stride `stride`.
pub(crate) struct WindowLattice {
    pub lo: [i64; 3],
    pub shape: [usize; 3],
    pub stride: usize,
}

impl WindowLattice {
    pub fn new(sim: &SimConfig, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::config("stride must be positive"));
        }
        let set = shrinking_set(&sim.grid, &sim.window, sim.horizon, sim.horizon)?;
        let (lo, hi) = set.bounds().ok_or_else(|| Error::domain("observation window holds no grid cell"))?;
        let shape = [0, 1, 2].map(|a| ((hi[a] - lo[a]) as usize) / stride + 1);
        Ok(WindowLattice { lo, shape, stride })
    }

    pub fn cells(&self) -> impl Iterator<Item = [i64; 3]> + '_ {
        let s = self.stride as i64;
        let [a, b, c] = self.shape;
        (0..a).flat_map(move |i| {
            (0..b).flat_map(move |j| {
                (0..c).map(move |k| [self.lo[0] + i as i64 * s, self.lo[1] + j as i64 * s, self.lo[2] + k as i64 * s])
            })
        })
    }

    /// `f(path values)` on `times × lattice`, as Hölder samples.
    pub fn samples(
        &self,
        sim: &SimConfig,
        times: &[f64],
        path: &PathSolution,
        value: impl Fn(usize, [i64; 3]) -> Result<f64>,
    ) -> Result<SpaceTimeSamples> {
        let h = sim.grid.spacing();
        let mut values = Vec::with_capacity(times.len() * self.shape.iter().product::<usize>());
        for &t in times {
            let k = snapshot_index(path, sim.step_of(t)?)?;
            for c in self.cells() {
                values.push(value(k, c)?);
            }
        }
        let origin = self.lo.map(|c| c as f64 * h);
        SpaceTimeSamples::new(times.to_vec(), origin, h * self.stride as f64, self.shape, values)
    }
}

pub(crate) fn snapshot_index(path: &PathSolution, step: usize) -> Result<usize> {
    path.index_of_step(step).ok_or_else(|| Error::domain(format!("no snapshot recorded at step {step}")))
}

/// Probe points `(snapshot, local cell index, t)` with `x ∈ K(t)`, laid
/// out for paths recorded under `sim`.
pub(crate) fn probe_lattice(sim: &SimConfig, times: &[f64]) -> Result<Vec<(usize, usize, f64)>> {
    let region = SnapshotBox::padded(&sim.grid, &sim.window, sim.horizon);
    let mut out = Vec::new();
    for &t in times {
        let step = sim.step_of(t)?;
        let k = sim
            .snapshot_steps
            .iter()
            .position(|&s| s == step)
            .ok_or_else(|| Error::domain(format!("no snapshot recorded at t = {t}")))?;
        let set = shrinking_set(&sim.grid, &sim.window, t, sim.horizon)?;
        for &c in set.cells() {
            let i = region
                .local(c)
                .ok_or_else(|| Error::domain(format!("probe cell {c:?} outside the recorded region")))?;
            out.push((k, i, t));
        }
    }
    Ok(out)
}

/// Running per-probe sums of gated `|Δ|^p` terms, accumulated in replica
/// order.
pub(crate) struct ProbeMoments {
    pub p: f64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    gated_out: Vec<usize>,
    pub count: usize,
}

impl ProbeMoments {
    pub fn new(probes: usize, p: f64) -> Self {
        ProbeMoments { p, sum: vec![0.0; probes], sum_sq: vec![0.0; probes], gated_out: vec![0; probes], count: 0 }
    }

    pub fn add(&mut self, diffs: &[f64], gates: &[bool]) {
        for (i, (&d, &g)) in diffs.iter().zip(gates).enumerate() {
            if g {
                let v = d.abs().powf(self.p);
                self.sum[i] += v;
                self.sum_sq[i] += v * v;
            } else {
                self.gated_out[i] += 1;
            }
        }
        self.count += 1;
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sum[i] / self.count as f64
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for i in 1..self.sum.len() {
            if self.sum[i] > self.sum[best] {
                best = i;
            }
        }
        best
    }

    /// Normal-approximation interval at probe `i`.
    pub fn estimate(&self, label: &str, i: usize) -> crate::norms::MomentEstimate {
        let m = self.count as f64;
        let mean = self.mean(i);
        let var = if self.count > 1 { ((self.sum_sq[i] - m * mean * mean) / (m - 1.0)).max(0.0) } else { 0.0 };
        let hw = crate::stats::z_value(crate::norms::CONFIDENCE) * (var / m).sqrt();
        crate::norms::MomentEstimate {
            label: label.to_string(),
            p: self.p,
            estimate: mean,
            ci_low: mean - hw,
            ci_high: mean + hw,
            half_width: hw,
            replicas: self.count,
            gated_out: self.gated_out[i],
            defined: self.gated_out[i] < self.count,
        }
    }
}

/// Median of a slice (average of the middle pair for even lengths).
pub(crate) fn median(xs: &[f64]) -> f64 {
    crate::stats::median(xs)
}
