//! Study drivers. Each study takes a [`StudyConfig`], runs its Monte Carlo
//! or quadrature sweep and returns a [`StudyResult`] holding per-replica
//! records, aggregates, regression fits and pass/fail checks.
//!
//! Replicas run in parallel but are folded in replica order, so the CSV and
//! summary bytes of a run depend only on the config and the seed.

mod common;
mod config;
mod increments;
mod kernel;
mod output;
mod pointwise;
mod simulate;
mod skeleton;
mod sobolev;
mod wz;

use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use config::{InitialKind, StudyConfig, StudyKind, MAX_SEED};
pub use increments::run_increment_study;
pub use kernel::{kernel_alpha, run_kernel_bounds, run_params, run_smoothing_bounds};
pub use output::{Check, FitRow, Manifest, OutputFormat, Row, StudyResult};
pub use pointwise::{run_rate_study, run_sup_convergence};
pub use simulate::{simulate, simulate_to, Equation};
pub use skeleton::run_skeleton_check;
pub use sobolev::{check_sobolev_exponents, run_sobolev_moments};
pub use wz::run_wz_study;

use crate::error::{Error, Result};

pub fn run_study(cfg: &StudyConfig, kind: StudyKind) -> Result<StudyResult> {
    match kind {
        StudyKind::Wz => run_wz_study(cfg),
        StudyKind::Increments => run_increment_study(cfg),
        StudyKind::SupConvergence => run_sup_convergence(cfg),
        StudyKind::Rate => run_rate_study(cfg),
        StudyKind::KernelBounds => run_kernel_bounds(cfg),
        StudyKind::SobolevMoments => run_sobolev_moments(cfg),
        StudyKind::Params => run_params(cfg),
        StudyKind::SkeletonCheck => run_skeleton_check(cfg),
        StudyKind::SmoothingBounds => run_smoothing_bounds(cfg),
    }
}

/// Runs `f` on a pool of `threads` workers, all cores when `None`. Returns
/// the pool size alongside the result.
pub fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<(T, usize)> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::config("threads must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let out = pool.install(f)?;
    Ok((out, pool.current_num_threads()))
}

/// [`run_study`] under [`in_pool`], with the run manifest attached.
pub fn run_with_manifest(cfg: &StudyConfig, kind: StudyKind, threads: Option<usize>) -> Result<StudyResult> {
    let started_at = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let (mut res, threads) = in_pool(threads, || run_study(cfg, kind))?;
    let modes = match kind {
        StudyKind::KernelBounds | StudyKind::Params => 0,
        _ => crate::lattice::ModeIndexMap::new(&crate::lattice::TorusGrid::new(cfg.side, cfg.grid)?, cfg.mode_radius)?.len(),
    };
    res.manifest = Some(Manifest {
        study: kind,
        config_hash: res.config_hash.clone(),
        root_seed: cfg.seed,
        modes,
        q: cfg.fine_level,
        n_list: cfg.levels.clone(),
        replicas: cfg.replicas,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        wall_seconds: clock.elapsed().as_secs_f64(),
        threads,
    });
    Ok(res)
}

/// Process exit status for an error: 2 for rejected input, 3 for numerical
/// divergence, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Admissibility { .. } | Error::ConfigNotFound(_) | Error::Toml(_) | Error::Domain(_) => 2,
        Error::Divergence { .. } => 3,
        _ => 1,
    }
}
