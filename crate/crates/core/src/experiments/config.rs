use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::{make_weights, CellRule, Field, ModeIndexMap, TorusGrid};
use crate::noise::ControlPath;
use crate::norms::BoxRegion;
use crate::solver::{desk_initial, CoefficientSet, ScalarFn, SimConfig};
use crate::wavekernel::{InitialData, MuQuad};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Wz,
    Increments,
    SupConvergence,
    Rate,
    KernelBounds,
    SobolevMoments,
    Params,
    SkeletonCheck,
    SmoothingBounds,
}

impl StudyKind {
    pub const ALL: [StudyKind; 9] = [
        StudyKind::Wz,
        StudyKind::Increments,
        StudyKind::SupConvergence,
        StudyKind::Rate,
        StudyKind::KernelBounds,
        StudyKind::SobolevMoments,
        StudyKind::Params,
        StudyKind::SkeletonCheck,
        StudyKind::SmoothingBounds,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            StudyKind::Wz => "wz",
            StudyKind::Increments => "increments",
            StudyKind::SupConvergence => "sup-convergence",
            StudyKind::Rate => "rate",
            StudyKind::KernelBounds => "kernel-bounds",
            StudyKind::SobolevMoments => "sobolev-moments",
            StudyKind::Params => "params",
            StudyKind::SkeletonCheck => "skeleton-check",
            StudyKind::SmoothingBounds => "smoothing-bounds",
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// `v₀ = 0.5 + 0.3cos(ξx₁)cos(ξx₂)`, `ṽ₀ = 0.2sin(ξx₃)`
    Desk,
    /// `v₀ ≡ initial_value`, `ṽ₀ = 0`
    Constant,
}

/// Everything a study run depends on. Keys missing from a config file take
/// the desk defaults below, and the hash covers the completed config.
pub const MAX_SEED: u64 = i64::MAX as u64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// Optional; when present it must match the study being run.
    pub study: Option<StudyKind>,

    pub beta: f64,
    pub side: f64,
    pub grid: usize,
    pub horizon: f64,
    pub fine_level: u32,
    /// Noise modes are the lattice vectors with `|k| ≤ mode_radius`.
    pub mode_radius: f64,
    /// Localization constant.
    pub alpha: f64,
    pub t0: f64,
    pub window_center: [f64; 3],
    pub window_side: f64,

    pub initial: InitialKind,
    pub initial_value: f64,
    pub a: ScalarFn,
    pub b: ScalarFn,
    pub d: ScalarFn,
    pub drift: ScalarFn,
    /// Constant control `h₁ ≡ control_amplitude` on the first mode.
    pub control_amplitude: f64,

    /// Root seed, below 2⁶³ so that it fits a TOML integer.
    pub seed: u64,
    pub replicas: usize,
    pub levels: Vec<u32>,

    pub rho: f64,
    pub gamma: f64,
    pub p: f64,
    /// Threshold for exceedance probabilities; the median of the first
    /// level's norms when absent.
    pub lambda: Option<f64>,

    pub pair_budget: usize,
    /// Spatial stride of Hölder samples, in cells.
    pub stride: usize,
    /// Number of uniformly spaced Hölder sample times in `[t₀, T]`.
    pub time_samples: usize,
    /// Times of the pointwise probe lattice (sup and rate studies).
    pub probe_times: Vec<f64>,
    pub sobolev_times: Vec<f64>,

    /// Time at which spatial increments are taken.
    pub increment_time: f64,
    /// Spatial separations in cells along each axis.
    pub space_separations: Vec<usize>,
    /// Temporal separations in units of `increment_dt`.
    pub time_separations: Vec<usize>,
    pub increment_dt: f64,
    /// Stride of the base points of increments, in cells.
    pub increment_stride: usize,

    pub betas: Vec<f64>,
    pub kernel_times: Vec<f64>,
    pub kernel_distances: Vec<f64>,
    pub quad: MuQuad,

    pub control_scales: Vec<f64>,
    pub skeleton_prefixes: Vec<usize>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            study: None,
            beta: 1.0,
            side: 4.0,
            grid: 32,
            horizon: 1.0,
            fine_level: 10,
            mode_radius: 1.0,
            alpha: 1.5,
            t0: 0.25,
            window_center: [2.0; 3],
            window_side: 1.0,
            initial: InitialKind::Desk,
            initial_value: 0.0,
            a: ScalarFn::zero(),
            b: ScalarFn::Affine { a0: 0.2, a1: 0.3 },
            d: ScalarFn::zero(),
            drift: ScalarFn::ClippedLinear { slope: 0.5, cap: 0.5 },
            control_amplitude: 0.0,
            seed: 1,
            replicas: 100,
            levels: vec![3, 4, 5, 6, 7],
            rho: 0.3,
            gamma: 0.05,
            p: 2.0,
            lambda: None,
            pair_budget: crate::norms::DEFAULT_PAIR_BUDGET,
            stride: 1,
            time_samples: 7,
            probe_times: (1..=8).map(|i| i as f64 / 8.0).collect(),
            sobolev_times: vec![0.5, 0.75, 1.0],
            increment_time: 1.0,
            space_separations: vec![1, 2, 3, 4],
            time_separations: vec![1, 2, 4, 8, 16],
            increment_dt: 1.0 / 256.0,
            increment_stride: 2,
            betas: vec![0.5, 1.0, 1.5],
            kernel_times: vec![0.25, 0.5, 1.0],
            kernel_distances: (0..6).map(|i| 0.05 * 8f64.powf(i as f64 / 5.0)).collect(),
            // the 12/16/12 default misses the 1% refinement tolerance for μ₄ at d = 0.05, β = 0.5
            quad: MuQuad { outer: 16, inner: 24, radial: 16 },
            control_scales: vec![0.0, 0.5, 1.0],
            skeleton_prefixes: vec![50, 100, 200, 400],
        }
    }
}

impl StudyConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::ConfigNotFound(path.display().to_string()),
            _ => Error::Io(e),
        })?;
        Self::from_toml_str(&text)
    }

    /// TOML of the completed config with sorted keys. Panics for a seed
    /// above [`MAX_SEED`], which [`StudyConfig::for_study`] rejects.
    pub fn canonical(&self) -> String {
        // toml tables are ordered maps, so a round trip through Value sorts keys
        let value = toml::Value::try_from(self).expect("config serialises");
        toml::to_string(&value).expect("value serialises")
    }

    /// SHA-256 of [`StudyConfig::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// Checks the study tag against the study being run, and the seed range.
    pub fn for_study(mut self, kind: StudyKind) -> Result<Self> {
        if self.seed > MAX_SEED {
            return Err(Error::config(format!("seed {} exceeds the largest TOML integer {MAX_SEED}", self.seed)));
        }
        match self.study {
            Some(k) if k != kind => {
                Err(Error::config(format!("config is for study '{k}' but '{kind}' was requested")))
            }
            _ => {
                self.study = Some(kind);
                Ok(self)
            }
        }
    }

    pub fn coefficients(&self) -> CoefficientSet {
        CoefficientSet {
            a: self.a,
            b: self.b,
            d: self.d,
            drift: self.drift,
            requires_affine_b: self.study == Some(StudyKind::Wz),
        }
    }

    pub fn window(&self) -> Result<BoxRegion> {
        BoxRegion::cube(self.window_center, self.window_side)
    }

    /// Simulation config without snapshots; studies choose their own times.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let grid = TorusGrid::new(self.side, self.grid)?;
        let weights = make_weights(&grid, self.beta, CellRule::CellAverage)?;
        let modes = ModeIndexMap::new(&grid, self.mode_radius)?;
        let initial = match self.initial {
            InitialKind::Desk => desk_initial(&grid),
            InitialKind::Constant => InitialData::new(
                Field::constant(grid, self.initial_value),
                Field::zeros(grid),
                1.0,
                1.0,
            )?,
        };
        let control = if self.control_amplitude == 0.0 {
            ControlPath::zeros(modes.len(), self.fine_level, self.horizon)
        } else {
            let c = self.control_amplitude;
            ControlPath::from_fn(modes.len(), self.fine_level, self.horizon, |j, _| if j == 1 { c } else { 0.0 })?
        };
        let cfg = SimConfig {
            grid,
            weights: Arc::new(weights),
            modes: Arc::new(modes),
            coefficients: self.coefficients(),
            initial: Arc::new(initial),
            control: Arc::new(control),
            horizon: self.horizon,
            fine_level: self.fine_level,
            level: self.levels.iter().copied().max().unwrap_or(3),
            seed: self.seed,
            alpha: self.alpha,
            window: self.window()?,
            t0: self.t0,
            snapshot_steps: Vec::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub(crate) fn require_levels(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("levels must be a non-empty strictly increasing list"));
        }
        Ok(())
    }

    pub(crate) fn require_replicas(&self, min: usize) -> Result<()> {
        if self.replicas < min {
            return Err(Error::config(format!("this study needs at least {min} replicas, got {}", self.replicas)));
        }
        Ok(())
    }

    /// `ρ < γ₁ ∧ γ₂ ∧ (2−β)/2`, with the desk initial data at `γ₁ = γ₂ = 1`.
    pub(crate) fn require_rho(&self) -> Result<()> {
        let bound = (1.0f64).min((2.0 - self.beta) / 2.0);
        if !(self.rho > 0.0 && self.rho < bound) {
            return Err(Error::Admissibility {
                hypothesis: "rho < gamma1 ^ gamma2 ^ (2-beta)/2",
                detail: format!("rho = {} but the bound is {bound}", self.rho),
            });
        }
        Ok(())
    }
}
