use crate::error::{Error, Result};
use crate::lattice::{Field, ModeIndexMap, SpectralWeights};

use super::brownian::BrownianFamily;

#[inline]
fn node(k: usize, n: u32, horizon: f64) -> f64 {
    k as f64 * horizon / (1u64 << n) as f64
}

/// `(t̲ₙ, tₙ)`: the last level-`n` node at or before `t` (the node at `T`
/// itself is excluded so `t = T` falls in the last interval) and the node
/// one interval earlier, floored at 0.
///
/// The comparison is made against node values computed by the same formula
/// used everywhere else, so endpoints never drift into the next interval.
pub fn dyadic_floor(t: f64, n: u32, horizon: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0 && t <= horizon) {
        return Err(Error::domain(format!("t = {t} lies outside [0, {horizon}]")));
    }
    let count = 1usize << n;
    let mut k = ((t / horizon) * count as f64).floor() as usize;
    k = k.min(count - 1);
    while k + 1 < count && node(k + 1, n, horizon) <= t {
        k += 1;
    }
    while k > 0 && node(k, n, horizon) > t {
        k -= 1;
    }
    Ok((node(k, n, horizon), node(k.saturating_sub(1), n, horizon)))
}

/// Integer version on a fine grid of `2^q` steps: returns the fine step
/// indices of `(t̲ₙ, tₙ)` for time `step·δ`.
pub fn dyadic_floor_steps(step: usize, n: u32, q: u32) -> (usize, usize) {
    let per = 1usize << (q - n);
    let count = 1usize << n;
    let k = (step / per).min(count - 1);
    (k * per, k.saturating_sub(1) * per)
}

/// Piecewise-constant derivatives `Ẇ_jⁿ` on the level-`n` intervals.
///
/// On `Δ_{i+1}` the value is `2ⁿ/T · W_j(Δ_i)`; it vanishes on `Δ₀` and for
/// `j > n`, so `wⁿ(t)` only sees increments that ended by `t̲ₙ`.
#[derive(Debug, Clone)]
pub struct SmoothedNoise {
    level: u32,
    fine_level: u32,
    horizon: f64,
    active: usize,
    /// `rates[(j-1)*2ⁿ + i]` for `j ≤ active`
    rates: Vec<f64>,
}

impl SmoothedNoise {
    pub fn new(fam: &BrownianFamily, n: u32) -> Result<Self> {
        let q = fam.fine_level();
        if n > q {
            return Err(Error::domain(format!("smoothing level {n} exceeds fine level {q}")));
        }
        let count = 1usize << n;
        let active = (n as usize).min(fam.modes());
        let scale = count as f64 / fam.horizon();
        let mut rates = vec![0.0; active * count];
        for j in 1..=active {
            for i in 1..count {
                rates[(j - 1) * count + i] = scale * fam.coarse_increment(j, n, i - 1);
            }
        }
        Ok(SmoothedNoise { level: n, fine_level: q, horizon: fam.horizon(), active, rates })
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
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Number of modes carrying a nonzero rate, `min(n, J)`.
    #[inline]
    pub fn active_modes(&self) -> usize {
        self.active
    }

    #[inline]
    pub fn intervals(&self) -> usize {
        1usize << self.level
    }

    /// `Ẇ_jⁿ` on interval `i`.
    #[inline]
    pub fn rate(&self, j: usize, i: usize) -> f64 {
        if j == 0 || j > self.active {
            0.0
        } else {
            self.rates[(j - 1) * self.intervals() + i]
        }
    }

    pub fn interval_of_time(&self, t: f64) -> usize {
        let count = self.intervals();
        (((t / self.horizon) * count as f64).floor() as usize).min(count - 1)
    }

    #[inline]
    pub fn interval_of_step(&self, step: usize) -> usize {
        (step >> (self.fine_level - self.level)).min(self.intervals() - 1)
    }

    pub fn rate_at(&self, j: usize, t: f64) -> f64 {
        self.rate(j, self.interval_of_time(t))
    }

    /// `‖wⁿ‖²_{ℋ_T} = Σ_j Σ_i (Ẇ_jⁿ on Δ_i)² · T 2^{-n}`.
    pub fn h_t_norm_sq(&self) -> f64 {
        self.rates.iter().map(|r| r * r).sum::<f64>() * self.horizon / self.intervals() as f64
    }

    /// `‖wⁿ(t)‖²_ℋ = Σ_j Ẇ_jⁿ(t)²`.
    pub fn h_norm_sq_at(&self, t: f64) -> f64 {
        let i = self.interval_of_time(t);
        (1..=self.active).map(|j| self.rate(j, i).powi(2)).sum()
    }

    /// `‖wⁿ 1_{[a,b]}‖²_{ℋ_T}`.
    pub fn h_t_norm_sq_on(&self, a: f64, b: f64) -> f64 {
        let count = self.intervals();
        let len = self.horizon / count as f64;
        let mut acc = 0.0;
        for i in 0..count {
            let lo = (i as f64 * len).max(a);
            let hi = ((i + 1) as f64 * len).min(b);
            if hi > lo {
                let r2: f64 = (1..=self.active).map(|j| self.rate(j, i).powi(2)).sum();
                acc += r2 * (hi - lo);
            }
        }
        acc
    }
}

/// `wⁿ(t,·) = Σ_{j ≤ n} Ẇ_jⁿ(t) e_j` with `e_j` the ℋ-orthonormal modes.
pub fn smoothed_field(sn: &SmoothedNoise, t: f64, map: &ModeIndexMap, w: &SpectralWeights) -> Result<Field> {
    if !(t >= 0.0 && t <= sn.horizon) {
        return Err(Error::domain(format!("t = {t} lies outside [0, {}]", sn.horizon)));
    }
    if map.len() < sn.active_modes() {
        return Err(Error::Shape(format!(
            "mode map has {} modes, smoothing uses {}",
            map.len(),
            sn.active_modes()
        )));
    }
    let g = *map.grid();
    let mut values = vec![0.0; g.len()];
    let i = sn.interval_of_time(t);
    for j in 1..=sn.active_modes() {
        let c = sn.rate(j, i);
        if c == 0.0 {
            continue;
        }
        let s = c * map.unit_scale(j, w);
        for (v, p) in values.iter_mut().zip(map.pattern(j)) {
            *v += s * p;
        }
    }
    Field::new(g, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{h_norm_spectral, make_weights, CellRule, TorusGrid};
    use crate::noise::sample_family;

    #[test]
    fn dyadic_floor_examples() {
        assert_eq!(dyadic_floor(0.7, 2, 1.0).unwrap(), (0.5, 0.25));
        assert_eq!(dyadic_floor(1.0, 3, 1.0).unwrap(), (0.875, 0.75));
        assert_eq!(dyadic_floor(0.2, 2, 1.0).unwrap().1, 0.0);
        assert_eq!(dyadic_floor(0.25, 2, 1.0).unwrap(), (0.25, 0.0));
        assert_eq!(dyadic_floor(1.4, 2, 2.0).unwrap(), (1.0, 0.5));
        assert_eq!(dyadic_floor(0.3, 0, 1.0).unwrap(), (0.0, 0.0));
        assert!(dyadic_floor(1.1, 2, 1.0).is_err());
        assert!(dyadic_floor(-0.1, 2, 1.0).is_err());
    }

    #[test]
    fn dyadic_floor_on_nodes_of_awkward_horizon() {
        let horizon = 0.3;
        for n in 1..8u32 {
            for k in 0..(1usize << n) {
                let t = node(k, n, horizon);
                assert_eq!(dyadic_floor(t, n, horizon).unwrap().0, t);
            }
        }
    }

    #[test]
    fn integer_floor_agrees() {
        for step in 0..=64usize {
            let (a, b) = dyadic_floor_steps(step, 3, 6);
            let (x, y) = dyadic_floor(step as f64 / 64.0, 3, 1.0).unwrap();
            assert_eq!((a as f64 / 64.0, b as f64 / 64.0), (x, y));
        }
    }

    #[test]
    fn delayed_rates() {
        let fam = sample_family(5, 4, 8, 1.0).unwrap();
        let sn = SmoothedNoise::new(&fam, 3).unwrap();
        for j in 1..=4 {
            assert_eq!(sn.rate(j, 0), 0.0);
        }
        assert_eq!(sn.rate(4, 5), 0.0);
        assert_eq!(sn.rate(2, 5), 8.0 * fam.coarse_increment(2, 3, 4));
    }

    #[test]
    fn future_increments_do_not_matter() {
        let fam = sample_family(9, 3, 8, 1.0).unwrap();
        let t = 0.6;
        let (under, _) = dyadic_floor(t, 3, 1.0).unwrap();
        let cut = (under / fam.delta()) as usize;
        let mut other = fam.clone();
        for j in 1..=3 {
            for v in &mut other.increments_mut(j)[cut..] {
                *v = 123.0;
            }
        }
        let a = SmoothedNoise::new(&fam, 3).unwrap();
        let b = SmoothedNoise::new(&other, 3).unwrap();
        for j in 1..=3 {
            assert_eq!(a.rate_at(j, t), b.rate_at(j, t));
        }
    }

    #[test]
    fn field_norm_is_rate_norm() {
        let g = TorusGrid::new(4.0, 8).unwrap();
        let w = make_weights(&g, 1.0, CellRule::CellAverage).unwrap();
        let map = ModeIndexMap::new(&g, 1.0).unwrap();
        let fam = sample_family(11, 7, 6, 1.0).unwrap();
        let sn = SmoothedNoise::new(&fam, 5).unwrap();
        let early = smoothed_field(&sn, 0.01, &map, &w).unwrap();
        assert_eq!(early.max_abs(), 0.0);
        let t = 0.55;
        let f = smoothed_field(&sn, t, &map, &w).unwrap();
        let want = sn.h_norm_sq_at(t);
        assert!((h_norm_spectral(&f, &w).unwrap() - want).abs() < 1e-10 * want.max(1.0));
    }

    #[test]
    fn level_one_single_mode() {
        let g = TorusGrid::new(4.0, 8).unwrap();
        let w = make_weights(&g, 1.0, CellRule::CellAverage).unwrap();
        let map = ModeIndexMap::new(&g, 1.0).unwrap();
        let fam = sample_family(3, 7, 4, 1.0).unwrap();
        let sn = SmoothedNoise::new(&fam, 1).unwrap();
        let f = smoothed_field(&sn, 0.75, &map, &w).unwrap();
        let want = fam.coarse_increment(1, 1, 0) * 2.0 * map.unit_scale(1, &w);
        assert!(f.values().iter().all(|v| (v - want).abs() < 1e-14));
    }
}
