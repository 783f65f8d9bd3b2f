use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic control `h = Σ_j h_j(s) e_j`, piecewise constant on the fine grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPath {
    modes: usize,
    fine_level: u32,
    horizon: f64,
    /// mode-major, `coeffs[(j-1)*steps + s]`
    coeffs: Vec<f64>,
}

impl ControlPath {
    pub fn zeros(modes: usize, fine_level: u32, horizon: f64) -> Self {
        ControlPath { modes, fine_level, horizon, coeffs: vec![0.0; modes * (1usize << fine_level)] }
    }

    /// Samples `h(j, s)` at the left end of every fine step.
    pub fn from_fn(modes: usize, fine_level: u32, horizon: f64, h: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let steps = 1usize << fine_level;
        let delta = horizon / steps as f64;
        let mut coeffs = Vec::with_capacity(modes * steps);
        for j in 1..=modes {
            for s in 0..steps {
                let v = h(j, s as f64 * delta);
                if !v.is_finite() {
                    return Err(Error::domain(format!("control value for mode {j} at step {s} is not finite")));
                }
                coeffs.push(v);
            }
        }
        Ok(ControlPath { modes, fine_level, horizon, coeffs })
    }

    #[inline]
    pub fn modes(&self) -> usize {
        self.modes
    }

    #[inline]
    pub fn fine_level(&self) -> u32 {
        self.fine_level
    }

    #[inline]
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    #[inline]
    pub fn steps(&self) -> usize {
        1usize << self.fine_level
    }

    #[inline]
    pub fn coeff(&self, j: usize, step: usize) -> f64 {
        self.coeffs[(j - 1) * self.steps() + step]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// `Σ_j ∫₀ᵀ h_j(s)² ds`, exact for the piecewise-constant path.
    pub fn h_t_norm_sq(&self) -> f64 {
        let delta = self.horizon / self.steps() as f64;
        self.coeffs.iter().map(|c| c * c).sum::<f64>() * delta
    }

    pub fn scaled(&self, c: f64) -> Self {
        ControlPath { coeffs: self.coeffs.iter().map(|v| v * c).collect(), ..self.clone() }
    }
}
