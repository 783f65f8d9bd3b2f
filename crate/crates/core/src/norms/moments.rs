use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats;

pub const CONFIDENCE: f64 = 0.95;

/// A Monte Carlo mean or probability with its 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub label: String,
    pub p: f64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub half_width: f64,
    pub replicas: usize,
    /// Replicas whose gate was off.
    pub gated_out: usize,
    /// False when every replica was gated out.
    pub defined: bool,
}

/// `E[|X|^p 1_L]` from per-replica samples and gates.
///
/// Gated-out replicas contribute zero but still count in the
/// denominator, so this is not a conditional mean.
pub fn lp_moment(label: &str, samples: &[f64], gates: &[bool], p: f64) -> Result<MomentEstimate> {
    if samples.len() != gates.len() {
        return Err(Error::Shape(format!("{} samples, {} gate flags", samples.len(), gates.len())));
    }
    if samples.is_empty() {
        return Err(Error::domain("no replicas"));
    }
    if !(p > 0.0) {
        return Err(Error::domain(format!("moment order must be positive, got {p}")));
    }
    if samples.len() < 30 {
        log::warn!("{label}: only {} replicas, normal interval unreliable", samples.len());
    }
    let terms: Vec<f64> = samples
        .iter()
        .zip(gates)
        .map(|(&x, &g)| if g { x.abs().powf(p) } else { 0.0 })
        .collect();
    let gated_out = gates.iter().filter(|g| !**g).count();
    Ok(from_terms(label, p, &terms, gated_out))
}

/// Mean of nonnegative per-replica terms, already gated.
pub fn mean_estimate(label: &str, p: f64, terms: &[f64], gates: &[bool]) -> Result<MomentEstimate> {
    if terms.len() != gates.len() || terms.is_empty() {
        return Err(Error::Shape(format!("{} terms, {} gate flags", terms.len(), gates.len())));
    }
    let gated: Vec<f64> = terms.iter().zip(gates).map(|(&t, &g)| if g { t } else { 0.0 }).collect();
    Ok(from_terms(label, p, &gated, gates.iter().filter(|g| !**g).count()))
}

fn from_terms(label: &str, p: f64, terms: &[f64], gated_out: usize) -> MomentEstimate {
    let m = terms.len();
    let (mean, sd) = stats::mean_sd(terms);
    let hw = if m > 1 { stats::z_value(CONFIDENCE) * sd / (m as f64).sqrt() } else { f64::INFINITY };
    let defined = gated_out < m;
    MomentEstimate {
        label: label.to_string(),
        p,
        estimate: if defined { mean } else { f64::NAN },
        ci_low: mean - hw,
        ci_high: mean + hw,
        half_width: hw,
        replicas: m,
        gated_out,
        defined,
    }
}

/// Proportion `k/n` with a Wilson interval.
pub fn probability(label: &str, k: usize, n: usize) -> Result<MomentEstimate> {
    if n == 0 || k > n {
        return Err(Error::domain(format!("invalid proportion {k}/{n}")));
    }
    let (lo, hi) = stats::wilson(k, n, CONFIDENCE);
    Ok(MomentEstimate {
        label: label.to_string(),
        p: 0.0,
        estimate: k as f64 / n as f64,
        ci_low: lo,
        ci_high: hi,
        half_width: 0.5 * (hi - lo),
        replicas: n,
        gated_out: 0,
        defined: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_samples() {
        let e = lp_moment("c", &[2.0; 40], &[true; 40], 3.0).unwrap();
        assert_eq!(e.estimate, 8.0);
        assert_eq!(e.half_width, 0.0);
    }

    #[test]
    fn gating_is_not_conditioning() {
        let gates: Vec<bool> = (0..40).map(|i| i % 2 == 0).collect();
        let e = lp_moment("g", &[1.0; 40], &gates, 2.0).unwrap();
        assert_eq!(e.estimate, 0.5);
        assert_eq!(e.gated_out, 20);
        let none = lp_moment("g", &[1.0; 40], &[false; 40], 2.0).unwrap();
        assert!(!none.defined && none.estimate.is_nan());
    }

    #[test]
    fn second_moment_of_standard_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| {
                let u1 = ((rng.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64;
                let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let e = lp_moment("z", &xs, &vec![true; xs.len()], 2.0).unwrap();
        assert!(e.ci_low <= 1.0 && 1.0 <= e.ci_high, "{e:?}");
        assert_eq!(e.replicas, 10_000);
    }

    #[test]
    fn proportions() {
        let e = probability("hit", 30, 100).unwrap();
        assert_eq!(e.estimate, 0.3);
        assert!(e.ci_low < 0.3 && e.ci_high > 0.3);
        assert!(probability("bad", 3, 2).is_err());
    }
}
