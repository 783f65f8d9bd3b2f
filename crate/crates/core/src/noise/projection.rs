use crate::error::{Error, Result};

/// Mode-by-time array on the fine grid, `data[(j-1)*steps + s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeModeArray {
    pub modes: usize,
    pub fine_level: u32,
    pub horizon: f64,
    pub data: Vec<f64>,
}

impl TimeModeArray {
    pub fn new(modes: usize, fine_level: u32, horizon: f64, data: Vec<f64>) -> Result<Self> {
        if data.len() != modes << fine_level {
            return Err(Error::Shape(format!("expected {} entries, got {}", modes << fine_level, data.len())));
        }
        Ok(TimeModeArray { modes, fine_level, horizon, data })
    }

    #[inline]
    pub fn steps(&self) -> usize {
        1usize << self.fine_level
    }

    #[inline]
    pub fn get(&self, j: usize, s: usize) -> f64 {
        self.data[(j - 1) * self.steps() + s]
    }
}

/// `‖f‖²_{ℋ_T}` for coefficients on an ℋ-orthonormal basis.
pub fn h_t_norm_sq(f: &TimeModeArray) -> f64 {
    let delta = f.horizon / f.steps() as f64;
    f.data.iter().map(|v| v * v).sum::<f64>() * delta
}

/// `πₙ∘τₙ`: shift by `2^{-n}T` clamped at `t`, then average over each
/// level-`n` interval and drop modes `j > n`.
pub fn project_shift(f: &TimeModeArray, n: u32, t: f64) -> Result<TimeModeArray> {
    if n > f.fine_level {
        return Err(Error::domain(format!("level {n} exceeds fine level {}", f.fine_level)));
    }
    if !(t >= 0.0 && t <= f.horizon) {
        return Err(Error::domain(format!("t = {t} lies outside [0, {}]", f.horizon)));
    }
    let steps = f.steps();
    let per = 1usize << (f.fine_level - n);
    let delta = f.horizon / steps as f64;
    let t_idx = ((t / delta).floor() as usize).min(steps - 1);
    let keep = (n as usize).min(f.modes);
    let mut out = vec![0.0; f.data.len()];
    for j in 1..=keep {
        let row = &f.data[(j - 1) * steps..j * steps];
        for i in 0..(1usize << n) {
            let mut acc = 0.0;
            for s in i * per..(i + 1) * per {
                acc += row[(s + per).min(t_idx)];
            }
            let mean = acc / per as f64;
            for s in i * per..(i + 1) * per {
                out[(j - 1) * steps + s] = mean;
            }
        }
    }
    TimeModeArray::new(f.modes, f.fine_level, f.horizon, out)
}
