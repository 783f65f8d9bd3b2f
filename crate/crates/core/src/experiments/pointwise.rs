use crate::error::Result;
use crate::solver::{run_lanes, LaneSpec, PathSolution};
use crate::stats::ols;

use super::common::{family, for_replicas, probe_lattice, snapshot_union, ProbeMoments};
use super::config::{StudyConfig, StudyKind};
use super::output::{Check, FitRow, Row, StudyResult};

type Pair<'a> = (&'a PathSolution, &'a PathSolution);

/// Shared driver: for every level, pointwise differences of two lanes on
/// the probe lattice `{(t, x) : x ∈ K(t)}`, gated by `Lₙ(t)`.
fn pointwise(
    cfg: &StudyConfig,
    kind: StudyKind,
    lanes: Vec<LaneSpec>,
    pick: impl for<'a> Fn(&'a [crate::solver::LaneOutput], usize) -> Pair<'a> + Sync,
    powers: &[f64],
) -> Result<(StudyResult, Vec<Vec<ProbeMoments>>, Vec<(usize, usize, f64)>)> {
    let mut sim = cfg.sim_config()?;
    sim.validate_holder()?;
    snapshot_union(&mut sim, &[&cfg.probe_times])?;
    let probes = probe_lattice(&sim, &cfg.probe_times)?;

    let mut res = StudyResult::new(cfg, kind);
    let mut moments: Vec<Vec<ProbeMoments>> = cfg
        .levels
        .iter()
        .map(|_| powers.iter().map(|&p| ProbeMoments::new(probes.len(), p)).collect())
        .collect();

    for_replicas(
        cfg.replicas,
        |r| {
            let fam = family(cfg, &sim, r)?;
            let out = run_lanes(&sim, Some(&fam), &[], &lanes)?;
            Ok((0..cfg.levels.len())
                .map(|i| {
                    let (a, b) = pick(&out, i);
                    let diffs: Vec<f64> = probes
                        .iter()
                        .map(|&(k, c, _)| a.snapshot(k)[c] - b.snapshot(k)[c])
                        .collect();
                    let gates: Vec<bool> = probes.iter().map(|&(k, _, _)| a.localized[k]).collect();
                    (diffs, gates)
                })
                .collect::<Vec<_>>())
        },
        |r, levels| {
            for (i, (diffs, gates)) in levels.into_iter().enumerate() {
                let sup = diffs.iter().zip(&gates).filter(|(_, g)| **g).fold(0.0f64, |m, (d, _)| m.max(d.abs()));
                let all_out = gates.iter().all(|g| !g);
                res.rows.push(Row::record("sup_abs_diff", Some(cfg.levels[i]), r, None, sup, all_out, cfg.seed));
                for m in moments[i].iter_mut() {
                    m.add(&diffs, &gates);
                }
            }
            Ok(())
        },
    )?;
    Ok((res, moments, probes))
}

/// `sup_{t, x ∈ K(t)} E|Xₙ − X|^p 1_{Lₙ(t)}` for each level.
pub fn run_sup_convergence(cfg: &StudyConfig) -> Result<StudyResult> {
    let cfg = cfg.clone().for_study(StudyKind::SupConvergence)?;
    cfg.require_levels()?;
    let mut lanes = vec![LaneSpec::full()];
    lanes.extend(cfg.levels.iter().map(|&n| LaneSpec::regularized().at_level(n)));
    let (mut res, moments, probes) =
        pointwise(&cfg, StudyKind::SupConvergence, lanes, |out, i| (&out[i + 1].path, &out[0].path), &[cfg.p])?;

    let mut sups = Vec::new();
    for (i, &n) in cfg.levels.iter().enumerate() {
        let m = &moments[i][0];
        let j = m.argmax();
        let e = m.estimate("sup_moment", j);
        res.rows.push(Row::aggregate(&e, Some(n), Some(probes[j].2), cfg.seed));
        sups.push(e);
    }
    let (first, last) = (&sups[0], &sups[sups.len() - 1]);
    res.checks.push(Check::at_most(
        "last_below_first",
        last.ci_high,
        first.ci_low,
        "upper CI at the finest level below the lower CI at the coarsest",
    ));
    let xs: Vec<f64> = cfg.levels.iter().map(|&n| n as f64).collect();
    if sups.len() >= 2 && sups.iter().all(|e| e.estimate > 0.0) {
        let ys: Vec<f64> = sups.iter().map(|e| e.estimate.log2()).collect();
        res.fits.push(FitRow::new("log2_sup_moment", ols(&xs, &ys)?, xs.len()));
    }
    Ok(res)
}

/// `sup E|Xₙ − Xₙ⁻|^p 1_{Lₙ}` against `n`, at orders `p` and `2p`; the
/// log₂ slope is compared with `−p(3−β)/2 + p/4`.
pub fn run_rate_study(cfg: &StudyConfig) -> Result<StudyResult> {
    let cfg = cfg.clone().for_study(StudyKind::Rate)?;
    cfg.require_levels()?;
    let lanes: Vec<LaneSpec> = cfg.levels.iter().map(|&n| LaneSpec::regularized().with_minus().at_level(n)).collect();
    let powers = [cfg.p, 2.0 * cfg.p];
    let (mut res, moments, probes) = pointwise(
        &cfg,
        StudyKind::Rate,
        lanes,
        |out, i| (&out[i].path, out[i].minus.as_ref().expect("minus lane")),
        &powers,
    )?;

    let xs: Vec<f64> = cfg.levels.iter().map(|&n| n as f64).collect();
    let mut slopes = Vec::new();
    for (pi, &p) in powers.iter().enumerate() {
        let mut ys = Vec::new();
        for (i, &n) in cfg.levels.iter().enumerate() {
            let m = &moments[i][pi];
            let j = m.argmax();
            let e = m.estimate("sup_moment", j);
            res.rows.push(Row::aggregate(&e, Some(n), Some(probes[j].2), cfg.seed));
            ys.push(e.estimate);
        }
        if xs.len() >= 2 && ys.iter().all(|&y| y > 0.0) {
            let ly: Vec<f64> = ys.iter().map(|y| y.log2()).collect();
            let fit = ols(&xs, &ly)?;
            res.fits.push(FitRow::new(&format!("log2_sup_moment:p={p}"), fit, xs.len()));
            slopes.push(Some(fit.slope));
        } else {
            slopes.push(None);
        }
    }
    let p = cfg.p;
    let bound = -p * (3.0 - cfg.beta) / 2.0 + 0.25 * p;
    match slopes[0] {
        Some(s) => {
            res.checks.push(Check::at_most(
                "rate_slope",
                s,
                bound,
                format!("log2 slope at p={p} must not exceed -p(3-beta)/2 + p/4 = {bound}"),
            ));
            if let Some(s2) = slopes[1] {
                let ratio = s2 / s;
                res.checks.push(Check::within(
                    "slope_ratio",
                    ratio,
                    2.0,
                    0.4,
                    format!("slope(p={}) / slope(p={p}) in [1.6, 2.4]", 2.0 * p),
                ));
            }
        }
        None => {
            let worst = res.aggregates("sup_moment").map(|r| r.estimate).fold(0.0, f64::max);
            res.checks.push(Check::at_most("difference_vanishes", worst, 0.0, "no fit possible"));
        }
    }
    Ok(res)
}
