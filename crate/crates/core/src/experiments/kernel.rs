use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{first_violation, max_interval_index, SmoothedNoise};
use crate::norms::{mean_estimate, probability};
use crate::stats::ols;
use crate::wavekernel::{check_exponents, mu1_diagonal_closed_form, mu_integral, MuKind};

use super::common::{family, for_replicas};
use super::config::{StudyConfig, StudyKind};
use super::output::{Check, FitRow, Row, StudyResult};

/// `α` used for the distance scaling of `μ₂` and `μ₄`. For `μ₂` it is 40%
/// of the admissible upper end `(2−β)∧1` (so 0.4 at β = 1), for `μ₄` half
/// of `2−β`.
pub fn kernel_alpha(which: MuKind, beta: f64) -> f64 {
    match which {
        MuKind::Two => 0.4 * (2.0 - beta).min(1.0),
        _ => 0.5 * (2.0 - beta),
    }
}

fn log2_fit(xs: &[f64], ys: &[f64]) -> Result<crate::stats::LinearFit> {
    let lx: Vec<f64> = xs.iter().map(|x| x.log2()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log2()).collect();
    ols(&lx, &ly)
}

/// Tables of `μ₁, μ₂, μ₄` and their regression slopes against the
/// exponents `3−β` (time) and `α` (distance).
pub fn run_kernel_bounds(cfg: &StudyConfig) -> Result<StudyResult> {
    let cfg = cfg.clone().for_study(StudyKind::KernelBounds)?;
    if cfg.kernel_distances.len() < 2 {
        return Err(Error::config("kernel_distances needs at least two entries"));
    }
    let o = [0.0; 3];
    let mut res = StudyResult::new(&cfg, StudyKind::KernelBounds);
    // the t-grid for the μ₁ slope spans [0.2, 1]
    let slope_times: Vec<f64> = (0..6).map(|i| 0.2 * 5f64.powf(i as f64 / 5.0)).collect();
    for &beta in &cfg.betas {
        let diag: Vec<f64> = cfg
            .kernel_times
            .par_iter()
            .map(|&t| Ok(mu_integral(MuKind::One, t, o, o, beta, 0.0, cfg.quad)?.value))
            .collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        for (&t, &v) in cfg.kernel_times.iter().zip(&diag) {
            let want = mu1_diagonal_closed_form(t, beta);
            let rel = (v - want).abs() / want;
            worst = worst.max(rel);
            res.rows.push(Row::value(&format!("mu1_diag:beta={beta}"), None, Some(t), v, cfg.seed));
            res.rows.push(Row::value(&format!("mu1_rel_err:beta={beta}"), None, Some(t), rel, cfg.seed));
        }
        res.checks.push(Check::at_most(&format!("mu1_closed_form:beta={beta}"), worst, 0.01, "relative error"));

        let ts: Vec<f64> = slope_times
            .par_iter()
            .map(|&t| Ok(mu_integral(MuKind::One, t, o, o, beta, 0.0, cfg.quad)?.value))
            .collect::<Result<_>>()?;
        let fit = log2_fit(&slope_times, &ts)?;
        res.fits.push(FitRow::new(&format!("mu1_t_slope:beta={beta}"), fit, ts.len()));
        res.checks.push(Check::within(&format!("mu1_t_slope:beta={beta}"), fit.slope, 3.0 - beta, 0.1, format!("target 3 - beta = {}", 3.0 - beta)));

        for which in [MuKind::Two, MuKind::Four] {
            let alpha = kernel_alpha(which, beta);
            let idx = which.index();
            let vals: Vec<f64> = cfg
                .kernel_distances
                .par_iter()
                .map(|&d| Ok(mu_integral(which, 1.0, o, [d, 0.0, 0.0], beta, alpha, cfg.quad)?.value))
                .collect::<Result<_>>()?;
            for (&d, &v) in cfg.kernel_distances.iter().zip(&vals) {
                res.rows.push(Row::value(&format!("mu{idx}:beta={beta}:t=1"), None, Some(d), v, cfg.seed));
            }
            let fit = log2_fit(&cfg.kernel_distances, &vals)?;
            let name = format!("mu{idx}_distance_slope:beta={beta}");
            res.fits.push(FitRow::new(&name, fit, vals.len()));
            res.checks.push(Check::within(&name, fit.slope, alpha, 0.15, format!("target alpha = {alpha}")));
        }
    }
    Ok(res)
}

/// `η`, `η₁` and the flags reported by [`check_exponents`].
pub fn run_params(cfg: &StudyConfig) -> Result<StudyResult> {
    let cfg = cfg.clone().for_study(StudyKind::Params)?;
    let r = check_exponents(cfg.beta, cfg.p, cfg.gamma);
    let mut res = StudyResult::new(&cfg, StudyKind::Params);
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    for (label, v) in [
        ("eta", r.eta),
        ("eta1", r.eta1),
        ("p_condition", flag(r.p_condition)),
        ("gamma_condition", flag(r.gamma_condition)),
        ("hypotheses_hold", flag(r.hypotheses_hold)),
        ("conclusion_holds", flag(r.conclusion_holds)),
        ("discrepancy", flag(r.discrepancy())),
    ] {
        res.rows.push(Row::value(label, None, None, v, cfg.seed));
    }
    Ok(res)
}

/// Growth of `E‖wⁿ‖²_{ℋ_T}`, the normalised size of `wⁿ` on `Lₙ`, and
/// `P(Lₙᶜ)` across levels.
pub fn run_smoothing_bounds(cfg: &StudyConfig) -> Result<StudyResult> {
    let cfg = &cfg.clone().for_study(StudyKind::SmoothingBounds)?;
    cfg.require_levels()?;
    let sim = cfg.sim_config()?;
    let mut res = StudyResult::new(cfg, StudyKind::SmoothingBounds);
    let nl = cfg.levels.len();
    let mut energy = vec![Vec::new(); nl];
    let mut sup_norm = vec![Vec::new(); nl];
    let mut gates = vec![Vec::new(); nl];
    for_replicas(
        cfg.replicas,
        |r| {
            let fam = family(cfg, &sim, r)?;
            cfg.levels
                .iter()
                .map(|&n| {
                    let sn = SmoothedNoise::new(&fam, n)?;
                    let dt = sim.horizon / sn.intervals() as f64;
                    let sup = (0..sn.intervals())
                        .map(|i| sn.h_norm_sq_at((i as f64 + 0.5) * dt))
                        .fold(0.0f64, f64::max)
                        .sqrt();
                    let last = max_interval_index(n, sim.horizon, sim.horizon);
                    let loc = first_violation(&fam, n, sim.alpha)?.is_none_or(|i| i > last);
                    Ok((sn.h_t_norm_sq(), sup, loc))
                })
                .collect::<Result<Vec<_>>>()
        },
        |r, v| {
            for (i, (e, s, g)) in v.into_iter().enumerate() {
                let n = Some(cfg.levels[i]);
                res.rows.push(Row::record("w_energy", n, r, None, e, false, cfg.seed));
                res.rows.push(Row::record("w_sup_norm", n, r, None, s, !g, cfg.seed));
                energy[i].push(e);
                sup_norm[i].push(s);
                gates[i].push(g);
            }
            Ok(())
        },
    )?;

    let xs: Vec<f64> = cfg.levels.iter().map(|&n| n as f64).collect();
    let mut log_energy = Vec::new();
    let mut ratios = Vec::new();
    let mut pfail = Vec::new();
    for (i, &n) in cfg.levels.iter().enumerate() {
        let ones = vec![true; energy[i].len()];
        let e = mean_estimate("w_energy_mean", 1.0, &energy[i], &ones)?;
        res.rows.push(Row::aggregate(&e, Some(n), None, cfg.seed));
        log_energy.push(e.estimate.log2());
        // mean over localized replicas of sup_t ‖wⁿ(t)‖_ℋ, normalised
        let kept: Vec<f64> = sup_norm[i].iter().zip(&gates[i]).filter(|(_, g)| **g).map(|(s, _)| *s).collect();
        let scale = (n as f64).powf(1.5) * 2f64.powf(n as f64 / 2.0);
        let ratio = if kept.is_empty() { f64::NAN } else { kept.iter().sum::<f64>() / kept.len() as f64 / scale };
        res.rows.push(Row::value("w_sup_ratio", Some(n), None, ratio, cfg.seed));
        ratios.push(ratio);
        let fails = gates[i].iter().filter(|g| !**g).count();
        let pe = probability("p_not_localized", fails, gates[i].len())?;
        res.rows.push(Row::aggregate(&pe, Some(n), None, cfg.seed));
        pfail.push(pe);
    }
    let fit = ols(&xs, &log_energy)?;
    res.fits.push(FitRow::new("log2_w_energy", fit, xs.len()));
    res.checks.push(Check::at_most("w_energy_growth", fit.slope, 1.2, "log2 slope of E||w^n||^2 against n"));

    let finite: Vec<f64> = ratios.iter().copied().filter(|r| r.is_finite() && *r > 0.0).collect();
    let spread = if finite.len() == ratios.len() {
        let geo = (finite.iter().map(|r| r.ln()).sum::<f64>() / finite.len() as f64).exp();
        finite.iter().map(|r| (r / geo - 1.0).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    res.checks.push(Check::at_most("w_sup_ratio_stable", spread, 0.2, "ratios within 20% of their geometric mean"));

    let mut worst = f64::NEG_INFINITY;
    for w in pfail.windows(2) {
        // a rise counts only when the later interval lies wholly above the earlier one
        worst = worst.max(w[1].ci_low - w[0].ci_high);
    }
    res.checks.push(Check::at_most("p_not_localized_nonincreasing", worst, 0.0, "Wilson intervals of consecutive levels"));
    Ok(res)
}
