use std::sync::Arc;

use crate::error::{Error, Result};
use crate::noise::ControlPath;
use crate::norms::holder_norm_with;
use crate::solver::{solve_skeleton, solve_spde, CoefficientSet, PathSolution, ScalarFn, SimConfig};

use super::common::{family, for_replicas, snapshot_union, window_times, WindowLattice};
use super::config::{StudyConfig, StudyKind};
use super::output::{Check, Row, StudyResult};

fn with_control(sim: &SimConfig, scale: f64) -> Result<SimConfig> {
    let mut s = sim.clone();
    s.control = Arc::new(ControlPath::from_fn(sim.mode_count(), sim.fine_level, sim.horizon, |j, _| {
        if j == 1 {
            scale
        } else {
            0.0
        }
    })?);
    Ok(s)
}

/// Skeletons `Φʰ` for `h₁ ≡ scale`, the zero-noise reduction, and the grid
/// Hölder distance from each skeleton to the nearest of the simulated
/// paths. The distance is descriptive only.
pub fn run_skeleton_check(cfg: &StudyConfig) -> Result<StudyResult> {
    let cfg = cfg.clone().for_study(StudyKind::SkeletonCheck)?;
    cfg.require_rho()?;
    let sigma = cfg.a;
    if !sigma.is_affine() {
        return Err(Error::Admissibility {
            hypothesis: "(h1) sigma affine",
            detail: format!("the noise coefficient must be affine, got {sigma:?}"),
        });
    }
    let base = cfg.sim_config()?;
    let mut sim = base.clone();
    sim.validate_holder()?;
    let times = window_times(&sim, cfg.time_samples)?;
    snapshot_union(&mut sim, &[&times])?;
    let lattice = WindowLattice::new(&sim, cfg.stride)?;

    let skel_coeffs = CoefficientSet { a: ScalarFn::zero(), b: ScalarFn::zero(), d: sigma, ..sim.coefficients };
    let noise_coeffs = CoefficientSet { a: sigma, b: ScalarFn::zero(), d: ScalarFn::zero(), ..sim.coefficients };

    let mut res = StudyResult::new(&cfg, StudyKind::SkeletonCheck);
    let mut skeletons = Vec::new();
    let mut reduction = 0.0f64;
    for &scale in &cfg.control_scales {
        let mut s = with_control(&sim, scale)?;
        s.coefficients = skel_coeffs;
        let phi = solve_skeleton(&s)?;
        // A = B = 0 leaves the Brownian family without effect
        let fam = family(&cfg, &s, 0)?;
        let x = solve_spde(&s, &fam)?;
        reduction = reduction.max(phi.max_abs_diff(&x)?);
        res.rows.push(Row::value("skeleton_sup", None, Some(scale), phi.max_abs(), cfg.seed));
        skeletons.push(phi);
    }
    res.checks.push(Check::at_most("zero_noise_reduction", reduction, 1e-10, "max |X - Phi^h| with A = B = 0, D = sigma"));

    if let ScalarFn::Affine { a1, .. } = sigma {
        if a1 == 0.0 && sim.coefficients.drift.is_zero() && cfg.control_scales.len() >= 2 {
            // Φʰ − X⁰ is linear in h for constant σ and b = 0
            let mut free = sim.clone();
            free.coefficients = CoefficientSet::zero();
            let x0 = solve_skeleton(&free)?;
            let (s1, s2) = (cfg.control_scales[0], cfg.control_scales[cfg.control_scales.len() - 1]);
            let (p1, p2) = (&skeletons[0], &skeletons[skeletons.len() - 1]);
            let mut worst = 0.0f64;
            for i in 0..x0.values.len() {
                let lhs = (p2.values[i] - x0.values[i]) * s1;
                let rhs = (p1.values[i] - x0.values[i]) * s2;
                worst = worst.max((lhs - rhs).abs());
            }
            res.checks.push(Check::at_most("skeleton_linearity", worst, 1e-10, "s1 (Phi^{s2} - X0) = s2 (Phi^{s1} - X0)"));
        }
    }

    let mut xsim = sim.clone();
    xsim.coefficients = noise_coeffs;
    xsim.control = Arc::new(ControlPath::zeros(sim.mode_count(), sim.fine_level, sim.horizon));
    let distance = |x: &PathSolution, phi: &PathSolution, r: u64| -> Result<f64> {
        let g = lattice.samples(&sim, &times, x, |k, c| Ok(x.at(k, c)? - phi.at(k, c)?))?;
        Ok(holder_norm_with(&g, cfg.rho, cfg.pair_budget, cfg.seed ^ r)?.norm)
    };
    let mut dists: Vec<Vec<f64>> = vec![Vec::new(); skeletons.len()];
    for_replicas(
        cfg.replicas,
        |r| {
            let fam = family(&cfg, &xsim, r)?;
            let x = solve_spde(&xsim, &fam)?;
            skeletons.iter().map(|phi| distance(&x, phi, r)).collect::<Result<Vec<f64>>>()
        },
        |r, ds| {
            for (i, d) in ds.into_iter().enumerate() {
                res.rows.push(Row::record("distance", None, r, Some(cfg.control_scales[i]), d, false, cfg.seed));
                dists[i].push(d);
            }
            Ok(())
        },
    )?;

    let mut monotone = true;
    for (i, &scale) in cfg.control_scales.iter().enumerate() {
        let mut prev = f64::INFINITY;
        for &m in cfg.skeleton_prefixes.iter().filter(|&&m| m <= cfg.replicas) {
            let nearest = dists[i][..m].iter().copied().fold(f64::INFINITY, f64::min);
            res.rows.push(Row::value(&format!("nearest:h={scale}"), None, Some(m as f64), nearest, cfg.seed));
            monotone &= nearest <= prev;
            prev = nearest;
        }
    }
    res.checks.push(Check::at_least(
        "nearest_nonincreasing",
        if monotone { 1.0 } else { 0.0 },
        1.0,
        "nearest-path distance does not grow with the number of paths",
    ));
    Ok(res)
}
