//! Time stepping for `X`, `Xₙ`, the truncated processes, the Picard
//! iterates and the skeleton, all through one shared stepper so that
//! comparisons over a single Brownian family are coupled pathwise.

mod coefficients;
mod config;
mod path;
mod stepper;

pub use coefficients::{CoefficientSet, ScalarFn};
pub use config::{desk_initial, SimConfig};
pub use path::{PathSolution, SnapshotBox};
pub use stepper::{run_lanes, BDrive, LaneOutput, LaneSpec, DIVERGENCE_CAP};

use crate::error::Result;
use crate::noise::{BrownianFamily, SmoothedNoise};
use crate::norms::shrinking_set;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncVariant {
    /// `X(t, tₙ, ·)`
    XTrunc,
    /// `Xₙ⁻`
    XnMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PicardVariant {
    Plain,
    Minus,
}

fn single(cfg: &SimConfig, fam: Option<&BrownianFamily>, sn: Option<&SmoothedNoise>, lane: LaneSpec) -> Result<LaneOutput> {
    let (sm, lane) = match sn {
        Some(s) => (vec![s], lane.at_level(s.level())),
        None => (Vec::new(), lane),
    };
    Ok(run_lanes(cfg, fam, &sm, &[lane])?.pop().expect("one lane in, one lane out"))
}

pub fn solve_spde(cfg: &SimConfig, fam: &BrownianFamily) -> Result<PathSolution> {
    Ok(single(cfg, Some(fam), None, LaneSpec::full())?.path)
}

pub fn solve_regularized(cfg: &SimConfig, fam: &BrownianFamily, sn: &SmoothedNoise) -> Result<PathSolution> {
    Ok(single(cfg, Some(fam), Some(sn), LaneSpec::regularized())?.path)
}

/// Sources cut at `tₙ(t)` for each snapshot time `t`, then free propagation
/// up to `t`.
pub fn solve_truncated(cfg: &SimConfig, fam: &BrownianFamily, sn: &SmoothedNoise, variant: TruncVariant) -> Result<PathSolution> {
    let lane = match variant {
        TruncVariant::XTrunc => LaneSpec::full(),
        TruncVariant::XnMinus => LaneSpec::regularized(),
    };
    let out = single(cfg, Some(fam), Some(sn), lane.with_minus())?;
    Ok(out.minus.expect("minus lane requested"))
}

/// Zeroes every snapshot outside `K(t)`.
pub fn mask_to_window(cfg: &SimConfig, path: &mut PathSolution) -> Result<()> {
    for k in 0..path.len() {
        let set = shrinking_set(&cfg.grid, &cfg.window, path.times[k], cfg.horizon)?;
        let region = path.region;
        let snap = path.snapshot_mut(k);
        for (v, c) in snap.iter_mut().zip(region.cells()) {
            if !set.contains(c) {
                *v = 0.0;
            }
        }
    }
    Ok(())
}

/// Lane layout for `Xₙ^m`: lane 0 is `X⁰`, lane `k` is driven by the
/// coefficients of lane `k − 1` restricted to `K(s)`.
pub fn picard_lanes(m: usize, n: u32, minus: bool) -> Vec<LaneSpec> {
    let mut lanes = vec![LaneSpec::free().at_level(n)];
    for k in 1..=m {
        lanes.push(LaneSpec { coeff_source: Some(k - 1), mask_sources: true, ..LaneSpec::regularized().at_level(n) });
    }
    if minus {
        lanes[m].minus = true;
    }
    lanes
}

/// `Xₙ^m·1_{K(t)}` or `Xₙ^{−,m}·1_{K(t)}`.
///
/// All iterates advance in lockstep over the same drivers, so the left-point
/// value of iterate `m − 1` is available when iterate `m` needs it.
pub fn picard_iterate(cfg: &SimConfig, fam: &BrownianFamily, sn: &SmoothedNoise, m: usize, variant: PicardVariant) -> Result<PathSolution> {
    let minus = variant == PicardVariant::Minus;
    let mut outs = run_lanes(cfg, Some(fam), &[sn], &picard_lanes(m, sn.level(), minus))?;
    let last = outs.pop().expect("at least the X⁰ lane");
    let mut path = if minus { last.minus.unwrap_or(last.path) } else { last.path };
    mask_to_window(cfg, &mut path)?;
    Ok(path)
}

/// `Φʰ`: control and drift only, no randomness consumed.
pub fn solve_skeleton(cfg: &SimConfig) -> Result<PathSolution> {
    Ok(single(cfg, None, None, LaneSpec::skeleton())?.path)
}
