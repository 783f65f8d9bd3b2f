use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::noise::SmoothedNoise;
use crate::solver::{solve_regularized, solve_skeleton, solve_spde, PathSolution};

use super::common::family;
use super::config::StudyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equation {
    /// `X`, driven by the Brownian family.
    Spde,
    /// `Xₙ` at the deepest configured level.
    Regularized,
    /// `Φʰ` for the configured control.
    Skeleton,
}

/// One path of `equation` for `replica`, recorded at `probe_times` on the
/// padded window region.
pub fn simulate(cfg: &StudyConfig, equation: Equation, replica: u64) -> Result<PathSolution> {
    let mut sim = cfg.sim_config()?;
    sim.set_snapshot_times(&cfg.probe_times)?;
    match equation {
        Equation::Skeleton => solve_skeleton(&sim),
        Equation::Spde => solve_spde(&sim, &family(cfg, &sim, replica)?),
        Equation::Regularized => {
            let fam = family(cfg, &sim, replica)?;
            let sn = SmoothedNoise::new(&fam, sim.level)?;
            solve_regularized(&sim, &fam, &sn)
        }
    }
}

/// [`simulate`], then `stem.npy` and `stem.json`.
pub fn simulate_to(cfg: &StudyConfig, equation: Equation, replica: u64, stem: impl AsRef<Path>) -> Result<PathSolution> {
    let path = simulate(cfg, equation, replica)?;
    if let Some(dir) = stem.as_ref().parent() {
        std::fs::create_dir_all(dir)?;
    }
    path.write(stem)?;
    Ok(path)
}
