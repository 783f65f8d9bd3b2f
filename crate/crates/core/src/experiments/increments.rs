use crate::error::{Error, Result};
use crate::norms::{mean_estimate, shrinking_set};
use crate::solver::{run_lanes, LaneSpec};
use crate::stats::ols;

use super::common::{family, for_replicas, snapshot_index, snapshot_union, WindowLattice};
use super::config::{StudyConfig, StudyKind};
use super::output::{Check, FitRow, Row, StudyResult};

/// Per replica and level: mean `|Δ|^p` for each spatial and temporal
/// separation, and the gate.
struct Increments {
    space: Vec<Vec<f64>>,
    time: Vec<Vec<f64>>,
    gates: Vec<bool>,
}

/// Gated `Lᵖ` increments of `Xₙ` in space and time, with log-log fits of
/// `moment^{1/p}` against the separation.
pub fn run_increment_study(cfg: &StudyConfig) -> Result<StudyResult> {
    let cfg = cfg.clone().for_study(StudyKind::Increments)?;
    cfg.require_levels()?;
    cfg.require_rho()?;
    let mut sim = cfg.sim_config()?;
    sim.validate_holder()?;
    if cfg.space_separations.len() < 2 || cfg.time_separations.len() < 2 {
        return Err(Error::config("increment studies need at least two separations in space and in time"));
    }
    let ts = cfg.increment_time;
    let earlier: Vec<f64> = cfg.time_separations.iter().map(|&k| ts - k as f64 * cfg.increment_dt).collect();
    if earlier.iter().any(|&t| t < sim.t0 - 1e-12) || ts > sim.horizon {
        return Err(Error::config(format!("temporal increments must stay inside [t0, T] = [{}, {}]", sim.t0, sim.horizon)));
    }
    snapshot_union(&mut sim, &[&[ts], &earlier])?;
    let window = shrinking_set(&sim.grid, &sim.window, sim.horizon, sim.horizon)?;
    let (_, hi) = window.bounds().ok_or_else(|| Error::domain("observation window holds no grid cell"))?;
    let bases: Vec<[i64; 3]> = WindowLattice::new(&sim, cfg.increment_stride)?.cells().collect();
    let h = sim.grid.spacing();
    let p = cfg.p;
    let lanes: Vec<LaneSpec> = cfg.levels.iter().map(|&n| LaneSpec::regularized().at_level(n)).collect();

    let mut per_level: Vec<Increments> = cfg
        .levels
        .iter()
        .map(|_| Increments {
            space: vec![Vec::new(); cfg.space_separations.len()],
            time: vec![Vec::new(); cfg.time_separations.len()],
            gates: Vec::new(),
        })
        .collect();
    let mut res = StudyResult::new(&cfg, StudyKind::Increments);

    for_replicas(
        cfg.replicas,
        |r| {
            let fam = family(&cfg, &sim, r)?;
            let out = run_lanes(&sim, Some(&fam), &[], &lanes)?;
            out.iter()
                .map(|lane| {
                    let path = &lane.path;
                    let k1 = snapshot_index(path, sim.step_of(ts)?)?;
                    let mut space = Vec::new();
                    for &s in &cfg.space_separations {
                        let (mut acc, mut count) = (0.0, 0usize);
                        for &b in &bases {
                            for a in 0..3 {
                                let mut c = b;
                                c[a] += s as i64;
                                if c[a] > hi[a] {
                                    continue;
                                }
                                acc += (path.at(k1, c)? - path.at(k1, b)?).abs().powf(p);
                                count += 1;
                            }
                        }
                        if count == 0 {
                            return Err(Error::config(format!("spatial separation {s} exceeds the window")));
                        }
                        space.push(acc / count as f64);
                    }
                    let mut time = Vec::new();
                    for &t in &earlier {
                        let k0 = snapshot_index(path, sim.step_of(t)?)?;
                        let mut acc = 0.0;
                        for &b in &bases {
                            acc += (path.at(k1, b)? - path.at(k0, b)?).abs().powf(p);
                        }
                        time.push(acc / bases.len() as f64);
                    }
                    Ok((space, time, path.localized[k1]))
                })
                .collect::<Result<Vec<_>>>()
        },
        |r, levels| {
            for (i, (space, time, gate)) in levels.into_iter().enumerate() {
                let n = cfg.levels[i];
                let inc = &mut per_level[i];
                for (j, v) in space.into_iter().enumerate() {
                    let sep = cfg.space_separations[j] as f64 * h;
                    res.rows.push(Row::record("space_inc", Some(n), r, Some(sep), v, !gate, cfg.seed));
                    inc.space[j].push(v);
                }
                for (j, v) in time.into_iter().enumerate() {
                    let sep = cfg.time_separations[j] as f64 * cfg.increment_dt;
                    res.rows.push(Row::record("time_inc", Some(n), r, Some(sep), v, !gate, cfg.seed));
                    inc.time[j].push(v);
                }
                inc.gates.push(gate);
            }
            Ok(())
        },
    )?;

    let threshold = cfg.rho - 0.1;
    let mut constants: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut exponents: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (i, &n) in cfg.levels.iter().enumerate() {
        let inc = &per_level[i];
        for (d, (dir, seps, data)) in [
            ("space", cfg.space_separations.iter().map(|&s| s as f64 * h).collect::<Vec<_>>(), &inc.space),
            ("time", cfg.time_separations.iter().map(|&s| s as f64 * cfg.increment_dt).collect::<Vec<_>>(), &inc.time),
        ]
        .into_iter()
        .enumerate()
        {
            let mut ys = Vec::new();
            for (j, terms) in data.iter().enumerate() {
                let e = mean_estimate(&format!("{dir}_moment"), p, terms, &inc.gates)?;
                res.rows.push(Row::aggregate(&e, Some(n), Some(seps[j]), cfg.seed));
                ys.push(e.estimate);
            }
            if ys.iter().all(|&y| y > 0.0 && y.is_finite()) {
                let lx: Vec<f64> = seps.iter().map(|s| s.log2()).collect();
                let ly: Vec<f64> = ys.iter().map(|y| y.log2() / p).collect();
                let fit = ols(&lx, &ly)?;
                res.fits.push(FitRow::new(&format!("{dir}_exponent:n={n}"), fit, lx.len()));
                exponents[d].push(fit.slope);
                constants[d].push(2f64.powf(fit.intercept));
            }
        }
    }
    for (d, dir) in ["space", "time"].into_iter().enumerate() {
        if exponents[d].is_empty() {
            // increments vanish identically, e.g. for constant data and zero coefficients
            let worst = res
                .rows
                .iter()
                .filter(|r| r.agg == 1 && r.label == format!("{dir}_moment"))
                .map(|r| r.estimate)
                .fold(0.0, f64::max);
            res.checks.push(Check::at_most(&format!("{dir}_increments_vanish"), worst, 0.0, "no fit possible"));
            continue;
        }
        let min = exponents[d].iter().copied().fold(f64::INFINITY, f64::min);
        res.checks.push(Check::at_least(
            &format!("{dir}_exponent"),
            min,
            threshold,
            format!("smallest fitted exponent over n must be at least rho - 0.1 = {threshold}"),
        ));
        let c = &constants[d];
        let mean = c.iter().sum::<f64>() / c.len() as f64;
        let spread = c.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0, f64::max);
        res.checks.push(Check::at_most(
            &format!("{dir}_constant_uniformity"),
            spread,
            0.3,
            "fitted constants across n within 30% of their mean",
        ));
    }
    Ok(res)
}
