use crate::error::Result;
use crate::norms::{holder_norm_with, probability};
use crate::solver::{run_lanes, LaneSpec};
use crate::stats::ols;

use super::common::{family, for_replicas, median, snapshot_union, window_times, WindowLattice};
use super::config::{StudyConfig, StudyKind};
use super::output::{Check, FitRow, Row, StudyResult};

/// Exceedance probabilities `P(‖Xₙ − X‖_{ρ,t₀,K} > λ)` over coupled
/// replicas of `X` and `Xₙ`.
pub fn run_wz_study(cfg: &StudyConfig) -> Result<StudyResult> {
    let cfg = cfg.clone().for_study(StudyKind::Wz)?;
    cfg.require_levels()?;
    cfg.require_replicas(50)?;
    cfg.require_rho()?;
    let mut sim = cfg.sim_config()?;
    sim.validate_holder()?;
    let times = window_times(&sim, cfg.time_samples)?;
    snapshot_union(&mut sim, &[&times])?;
    let lattice = WindowLattice::new(&sim, cfg.stride)?;

    let mut lanes = vec![LaneSpec::full()];
    lanes.extend(cfg.levels.iter().map(|&n| LaneSpec::regularized().at_level(n)));

    let mut res = StudyResult::new(&cfg, StudyKind::Wz);
    let mut norms: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.replicas); cfg.levels.len()];
    for_replicas(
        cfg.replicas,
        |r| {
            let fam = family(&cfg, &sim, r)?;
            let out = run_lanes(&sim, Some(&fam), &[], &lanes)?;
            let x = &out[0].path;
            out[1..]
                .iter()
                .map(|lane| {
                    let xn = &lane.path;
                    let g = lattice.samples(&sim, &times, x, |k, c| Ok(xn.at(k, c)? - x.at(k, c)?))?;
                    Ok(holder_norm_with(&g, cfg.rho, cfg.pair_budget, cfg.seed ^ r)?.norm)
                })
                .collect::<Result<Vec<f64>>>()
        },
        |r, v| {
            for (i, norm) in v.into_iter().enumerate() {
                res.rows.push(Row::record("holder_diff", Some(cfg.levels[i]), r, None, norm, false, cfg.seed));
                norms[i].push(norm);
            }
            Ok(())
        },
    )?;

    let lambda = cfg.lambda.unwrap_or_else(|| median(&norms[0]));
    res.rows.push(Row::value("lambda", None, None, lambda, cfg.seed));
    let mut probs = Vec::new();
    let mut medians = Vec::new();
    for (i, &n) in cfg.levels.iter().enumerate() {
        let hits = norms[i].iter().filter(|&&v| v > lambda).count();
        let e = probability("prob_exceed", hits, norms[i].len())?;
        res.rows.push(Row::aggregate(&e, Some(n), Some(lambda), cfg.seed));
        let med = median(&norms[i]);
        res.rows.push(Row::value("median_norm", Some(n), None, med, cfg.seed));
        medians.push(med);
        probs.push(e);
    }
    if cfg.levels.len() >= 2 && medians.iter().all(|&m| m > 0.0) {
        let xs: Vec<f64> = cfg.levels.iter().map(|&n| n as f64).collect();
        let ys: Vec<f64> = medians.iter().map(|m| m.log2()).collect();
        res.fits.push(FitRow::new("log2_median_norm", ols(&xs, &ys)?, xs.len()));
    }
    let (first, last) = (&probs[0], &probs[probs.len() - 1]);
    res.checks.push(Check::at_most(
        "exceedance_halves",
        last.ci_high,
        0.5 * first.ci_low,
        format!(
            "Wilson upper bound at n={} must not exceed half the Wilson lower bound at n={}",
            cfg.levels[cfg.levels.len() - 1],
            cfg.levels[0]
        ),
    ));
    Ok(res)
}
