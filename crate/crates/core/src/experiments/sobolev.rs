use crate::error::{Error, Result};
use crate::norms::{frac_sobolev, mean_estimate, shrinking_set, CellSet};
use crate::solver::{run_lanes, LaneSpec};

use super::common::{family, for_replicas, snapshot_index, snapshot_union};
use super::config::{StudyConfig, StudyKind};
use super::output::{Check, Row, StudyResult};

/// `p > (6 ∨ 2(4−β))/(2−β)` and `γ < γ₁ ∧ γ₂ ∧ ((2−β)/2 − 3/p)`.
pub fn check_sobolev_exponents(beta: f64, p: f64, gamma: f64) -> Result<()> {
    let pmin = 6f64.max(2.0 * (4.0 - beta)) / (2.0 - beta);
    if !(p > pmin) {
        return Err(Error::Admissibility {
            hypothesis: "p > (6 v 2(4-beta))/(2-beta)",
            detail: format!("p = {p} but the bound is {pmin:.4} at beta = {beta}"),
        });
    }
    let gmax = 1f64.min((2.0 - beta) / 2.0 - 3.0 / p);
    if !(gamma > 0.0 && gamma < gmax) {
        return Err(Error::Admissibility {
            hypothesis: "0 < gamma < gamma1 ^ gamma2 ^ ((2-beta)/2 - 3/p)",
            detail: format!("gamma = {gamma} but the bound is {gmax:.4}"),
        });
    }
    Ok(())
}

/// Gated `E[(‖Xₙ(t)‖^p_{W^{γ,p}(K(t))} + ‖Xₙ⁻(t)‖^p) 1_{Lₙ(t)}]` over a
/// time sweep and a level sweep.
pub fn run_sobolev_moments(cfg: &StudyConfig) -> Result<StudyResult> {
    let cfg = cfg.clone().for_study(StudyKind::SobolevMoments)?;
    cfg.require_levels()?;
    check_sobolev_exponents(cfg.beta, cfg.p, cfg.gamma)?;
    let mut sim = cfg.sim_config()?;
    snapshot_union(&mut sim, &[&cfg.sobolev_times])?;
    let sets: Vec<CellSet> = cfg
        .sobolev_times
        .iter()
        .map(|&t| shrinking_set(&sim.grid, &sim.window, t, sim.horizon))
        .collect::<Result<_>>()?;
    let lanes: Vec<LaneSpec> = cfg.levels.iter().map(|&n| LaneSpec::regularized().with_minus().at_level(n)).collect();
    let nt = cfg.sobolev_times.len();

    let mut res = StudyResult::new(&cfg, StudyKind::SobolevMoments);
    // terms[level][time] over replicas, with matching gates
    let mut terms = vec![vec![Vec::new(); nt]; cfg.levels.len()];
    let mut gates = vec![vec![Vec::new(); nt]; cfg.levels.len()];

    for_replicas(
        cfg.replicas,
        |r| {
            let fam = family(&cfg, &sim, r)?;
            let out = run_lanes(&sim, Some(&fam), &[], &lanes)?;
            out.iter()
                .map(|lane| {
                    let minus = lane.minus.as_ref().expect("minus lane");
                    cfg.sobolev_times
                        .iter()
                        .zip(&sets)
                        .map(|(&t, set)| {
                            let k = snapshot_index(&lane.path, sim.step_of(t)?)?;
                            let mut total = 0.0;
                            for path in [&lane.path, minus] {
                                let v: Vec<f64> = set.cells().iter().map(|&c| path.at(k, c)).collect::<Result<_>>()?;
                                total += frac_sobolev(&v, set, cfg.gamma, cfg.p)?.full_pow();
                            }
                            Ok((total, lane.path.localized[k]))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        },
        |r, levels| {
            for (i, per_time) in levels.into_iter().enumerate() {
                for (j, (v, g)) in per_time.into_iter().enumerate() {
                    let t = cfg.sobolev_times[j];
                    res.rows.push(Row::record("sobolev_pow", Some(cfg.levels[i]), r, Some(t), v, !g, cfg.seed));
                    terms[i][j].push(v);
                    gates[i][j].push(g);
                }
            }
            Ok(())
        },
    )?;

    let mut sups = Vec::new();
    for (i, &n) in cfg.levels.iter().enumerate() {
        let mut sup = f64::NEG_INFINITY;
        for j in 0..nt {
            let e = mean_estimate("sobolev_moment", cfg.p, &terms[i][j], &gates[i][j])?;
            res.rows.push(Row::aggregate(&e, Some(n), Some(cfg.sobolev_times[j]), cfg.seed));
            if e.defined {
                sup = sup.max(e.estimate);
            }
        }
        res.rows.push(Row::value("sup_t_moment", Some(n), None, sup, cfg.seed));
        sups.push(sup);
    }
    let max = sups.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = sups.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if min > 0.0 { max / min } else if max == 0.0 { 1.0 } else { f64::INFINITY };
    res.rows.push(Row::value("max_min_ratio", None, None, ratio, cfg.seed));
    res.checks.push(Check::at_most("moment_ratio", ratio, 3.0, "max over n / min over n of sup_t moment"));
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_examples() {
        check_sobolev_exponents(1.0, 8.0, 0.05).unwrap();
        assert!(check_sobolev_exponents(1.0, 6.0, 0.05).is_err());
        // 0.5 − 3/8 = 0.125
        assert!(check_sobolev_exponents(1.0, 8.0, 0.13).is_err());
        // the 6 branch governs for β > 1
        assert!(check_sobolev_exponents(1.5, 11.0, 0.01).is_err());
    }
}
