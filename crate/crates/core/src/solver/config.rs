use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{make_weights, CellRule, Field, ModeIndexMap, SpectralWeights, TorusGrid};
use crate::noise::{BrownianFamily, ControlPath, MIN_ALPHA};
use crate::norms::BoxRegion;
use crate::wavekernel::InitialData;

use super::coefficients::CoefficientSet;

/// Problem data for one simulation. Heavy members sit behind `Arc` so that
/// replicas can share a config cheaply.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub grid: TorusGrid,
    pub weights: Arc<SpectralWeights>,
    /// Noise modes `e_1..e_J`; `J = modes.len()`.
    pub modes: Arc<ModeIndexMap>,
    pub coefficients: CoefficientSet,
    pub initial: Arc<InitialData>,
    pub control: Arc<ControlPath>,
    pub horizon: f64,
    pub fine_level: u32,
    /// Smoothing level `n`.
    pub level: u32,
    pub seed: u64,
    pub alpha: f64,
    /// Observation box `K`.
    pub window: BoxRegion,
    pub t0: f64,
    /// Fine step indices at which paths are recorded, strictly increasing.
    pub snapshot_steps: Vec<usize>,
}

/// Smooth initial data used by the desk configuration:
/// `v₀ = 0.5 + 0.3 cos(ξx₁)cos(ξx₂)`, `ṽ₀ = 0.2 sin(ξx₃)` with `ξ = 2π/L`.
pub fn desk_initial(grid: &TorusGrid) -> InitialData {
    let w = grid.dxi();
    let v0 = Field::from_fn(*grid, |x| 0.5 + 0.3 * (w * x[0]).cos() * (w * x[1]).cos());
    let v1 = Field::from_fn(*grid, |x| 0.2 * (w * x[2]).sin());
    InitialData { v0, v0_dot: v1, gamma1: 1.0, gamma2: 1.0 }
}

impl SimConfig {
    /// Desk defaults: `L = 4`, `N = 32`, `T = 1`, `q = 10`, `|k| ≤ 1`
    /// (`J = 7`), `K` the centred cube of side `L/4`, zero coefficients.
    pub fn desk(beta: f64) -> Result<Self> {
        let grid = TorusGrid::new(4.0, 32)?;
        let weights = make_weights(&grid, beta, CellRule::CellAverage)?;
        let modes = ModeIndexMap::new(&grid, 1.0)?;
        let (q, horizon) = (10, 1.0);
        let control = ControlPath::zeros(modes.len(), q, horizon);
        let mut cfg = SimConfig {
            grid,
            weights: Arc::new(weights),
            modes: Arc::new(modes),
            coefficients: CoefficientSet::zero(),
            initial: Arc::new(desk_initial(&grid)),
            control: Arc::new(control),
            horizon,
            fine_level: q,
            level: 3,
            seed: 0,
            alpha: 1.5,
            window: BoxRegion::cube([2.0; 3], 1.0)?,
            t0: 0.25,
            snapshot_steps: Vec::new(),
        };
        cfg.set_snapshot_times(&(0..=8).map(|i| i as f64 / 8.0).collect::<Vec<_>>())?;
        Ok(cfg)
    }

    pub fn steps(&self) -> usize {
        1usize << self.fine_level
    }

    pub fn delta(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn time_of(&self, step: usize) -> f64 {
        step as f64 * self.delta()
    }

    /// Fine step index of a time that must sit on the fine grid.
    pub fn step_of(&self, t: f64) -> Result<usize> {
        let x = t / self.delta();
        let s = x.round();
        if !(s >= 0.0 && (x - s).abs() < 1e-9 && s as usize <= self.steps()) {
            return Err(Error::domain(format!("time {t} is not a node of the fine grid")));
        }
        Ok(s as usize)
    }

    pub fn set_snapshot_times(&mut self, times: &[f64]) -> Result<()> {
        let steps = times.iter().map(|&t| self.step_of(t)).collect::<Result<Vec<_>>>()?;
        self.snapshot_steps = steps;
        self.check_snapshots()
    }

    fn check_snapshots(&self) -> Result<()> {
        if self.snapshot_steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("snapshot times must be strictly increasing"));
        }
        if self.snapshot_steps.last().is_some_and(|&s| s > self.steps()) {
            return Err(Error::config("snapshot time past the horizon"));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !self.weights.grid().same_as(g) || !self.modes.grid().same_as(g) {
            return Err(Error::config("weights and modes must live on the simulation grid"));
        }
        if !self.initial.v0.grid().same_as(g) || !self.initial.v0_dot.grid().same_as(g) {
            return Err(Error::config("initial data must live on the simulation grid"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(1..=30).contains(&self.fine_level) {
            return Err(Error::config(format!("fine level must lie in 1..=30, got {}", self.fine_level)));
        }
        if self.fine_level < self.level + 3 {
            return Err(Error::config(format!(
                "fine level q = {} must be at least n + 3 = {}",
                self.fine_level,
                self.level + 3
            )));
        }
        let shield = self.window.diameter() + 2.0 * self.horizon + 2.0 * g.spacing();
        if g.side() < shield - 1e-12 {
            return Err(Error::config(format!(
                "propagation shielding needs L >= diam(K) + 2T + 2h = {shield:.4}, got L = {}",
                g.side()
            )));
        }
        if !(self.alpha > MIN_ALPHA) {
            return Err(Error::config(format!("alpha must exceed {MIN_ALPHA:.5}, got {}", self.alpha)));
        }
        if !(self.t0 >= 0.0 && self.t0 < self.horizon) {
            return Err(Error::config(format!("t0 must lie in [0, T), got {}", self.t0)));
        }
        let c = &self.control;
        if c.fine_level() != self.fine_level || c.horizon() != self.horizon || c.modes() > self.mode_count() {
            return Err(Error::config("control path does not match the fine grid or mode count"));
        }
        self.check_snapshots()?;
        self.coefficients.validate()
    }

    /// Hölder studies additionally need `t₀ > 0`.
    pub fn validate_holder(&self) -> Result<()> {
        self.validate()?;
        if !(self.t0 > 0.0) {
            return Err(Error::config("t0 must be positive for Hölder studies"));
        }
        Ok(())
    }

    pub fn check_family(&self, fam: &BrownianFamily) -> Result<()> {
        if fam.modes() != self.mode_count() || fam.fine_level() != self.fine_level || fam.horizon() != self.horizon {
            return Err(Error::config(format!(
                "Brownian family (J={}, q={}, T={}) does not match config (J={}, q={}, T={})",
                fam.modes(),
                fam.fine_level(),
                fam.horizon(),
                self.mode_count(),
                self.fine_level,
                self.horizon
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_config_is_valid() {
        let c = SimConfig::desk(1.0).unwrap();
        c.validate_holder().unwrap();
        assert_eq!(c.mode_count(), 7);
        assert_eq!(c.snapshot_steps.len(), 9);
        assert_eq!(*c.snapshot_steps.last().unwrap(), 1024);
    }

    #[test]
    fn shielding_is_enforced() {
        let mut c = SimConfig::desk(1.0).unwrap();
        c.window = BoxRegion::cube([2.0; 3], 1.2).unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn fine_level_must_clear_smoothing_level() {
        let mut c = SimConfig::desk(1.0).unwrap();
        c.level = 8;
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("n + 3"), "{e}");
    }

    #[test]
    fn off_grid_snapshot_times_are_rejected() {
        let mut c = SimConfig::desk(1.0).unwrap();
        assert!(c.set_snapshot_times(&[0.5, 0.3333]).is_err());
        assert!(c.set_snapshot_times(&[0.5, 0.25]).is_err());
    }
}
