use crate::error::{Error, Result};

use super::brownian::BrownianFamily;

/// Lower bound `(2 ln 2)^{1/2}` on the localisation constant.
pub const MIN_ALPHA: f64 = 1.177_410_022_515_474_6;

/// `α n^{1/2} 2^{-n/2}`.
pub fn localization_threshold(n: u32, alpha: f64) -> f64 {
    alpha * (n as f64).sqrt() * 2f64.powf(-0.5 * n as f64)
}

/// Last interval index inspected at time `t`: `⌈2ⁿt/T - 1⌉⁺`, clamped to `2ⁿ - 1`.
pub fn max_interval_index(n: u32, t: f64, horizon: f64) -> usize {
    let count = 1usize << n;
    let x = (t / horizon) * count as f64 - 1.0;
    let k = if x <= 0.0 { 0 } else { x.ceil() as usize };
    k.min(count - 1)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > MIN_ALPHA {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must exceed (2 ln 2)^(1/2) = {MIN_ALPHA:.5}, got {alpha}")))
    }
}

/// First level-`n` interval on which some `|W_j(Δ_i)|`, `j ≤ n`, exceeds
/// the threshold. `Lₙ(t)` holds iff this is `None` or lies past
/// [`max_interval_index`]`(n, t)`.
pub fn first_violation(fam: &BrownianFamily, n: u32, alpha: f64) -> Result<Option<usize>> {
    check_alpha(alpha)?;
    if n > fam.fine_level() {
        return Err(Error::domain(format!("level {n} exceeds fine level {}", fam.fine_level())));
    }
    let thr = localization_threshold(n, alpha);
    let active = (n as usize).min(fam.modes());
    for i in 0..(1usize << n) {
        for j in 1..=active {
            if fam.coarse_increment(j, n, i).abs() > thr {
                return Ok(Some(i));
            }
        }
    }
    Ok(None)
}

pub fn localization_indicator(fam: &BrownianFamily, n: u32, t: f64, alpha: f64) -> Result<bool> {
    let horizon = fam.horizon();
    if !(t >= 0.0 && t <= horizon) {
        return Err(Error::domain(format!("t = {t} lies outside [0, {horizon}]")));
    }
    let last = max_interval_index(n, t, horizon);
    Ok(match first_violation(fam, n, alpha)? {
        None => true,
        Some(i) => i > last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::sample_family;

    #[test]
    fn zero_path_is_localised() {
        let fam = BrownianFamily::zeros(3, 6, 1.0);
        assert!(localization_indicator(&fam, 3, 1.0, 1.25).unwrap());
    }

    #[test]
    fn one_large_increment_breaks_it() {
        let mut fam = BrownianFamily::zeros(3, 6, 1.0);
        let n = 3;
        let big = 2.0 * localization_threshold(n, 1.25);
        // first fine step of Δ_2 at level 3
        fam.increments_mut(2)[2 * 8] = big;
        assert!(!localization_indicator(&fam, n, 1.0, 1.25).unwrap());
        // Δ_2 is only inspected once 2ⁿt - 1 > 1
        assert!(localization_indicator(&fam, n, 0.25, 1.25).unwrap());
        assert!(!localization_indicator(&fam, n, 0.26, 1.25).unwrap());
        // modes above n are ignored
        let mut other = BrownianFamily::zeros(5, 6, 1.0);
        other.increments_mut(4)[0] = big;
        assert!(localization_indicator(&other, 3, 1.0, 1.25).unwrap());
    }

    #[test]
    fn decreasing_in_time() {
        for seed in 0..20 {
            let fam = sample_family(seed, 5, 8, 1.0).unwrap();
            let mut prev = true;
            for k in 0..=32 {
                let now = localization_indicator(&fam, 4, k as f64 / 32.0, 1.25).unwrap();
                assert!(prev || !now);
                prev = now;
            }
        }
    }

    #[test]
    fn alpha_guard() {
        let fam = BrownianFamily::zeros(1, 4, 1.0);
        assert!(localization_indicator(&fam, 2, 1.0, 1.0).is_err());
        assert!(localization_indicator(&fam, 2, 1.0, MIN_ALPHA).is_err());
        assert!((MIN_ALPHA - (2.0 * 2f64.ln()).sqrt()).abs() < 1e-15);
    }
}
