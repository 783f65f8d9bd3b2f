use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Everything needed to regenerate a family bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub root_seed: u64,
    pub replica: u64,
    pub modes: usize,
    pub fine_level: u32,
    /// Horizon, stored as raw bits so the record stays `Eq`.
    pub horizon_bits: u64,
}

impl SeedRecord {
    pub fn horizon(&self) -> f64 {
        f64::from_bits(self.horizon_bits)
    }
}

/// Brownian increments `ΔW_j` on the fine grid `δ = T·2^{-q}`.
#[derive(Debug, Clone)]
pub struct BrownianFamily {
    record: SeedRecord,
    delta: f64,
    steps: usize,
    /// mode-major: `incr[(j-1)*steps + s]`
    incr: Vec<f64>,
}

fn key(root_seed: u64, replica: u64) -> [u8; 32] {
    let mut k = [0u8; 32];
    k[..8].copy_from_slice(&root_seed.to_le_bytes());
    k[8..16].copy_from_slice(&replica.to_le_bytes());
    k[16..24].copy_from_slice(b"rieszwav");
    k
}

#[inline]
fn box_muller(a: u64, b: u64) -> f64 {
    // u1 in (0, 1], u2 in [0, 1)
    let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Standard normal for `(mode j, step)`, by seeking the counter directly.
fn standard_normal_at(root_seed: u64, replica: u64, j: usize, step: usize) -> f64 {
    let mut rng = ChaCha8Rng::from_seed(key(root_seed, replica));
    rng.set_stream(j as u64);
    rng.set_word_pos(4 * step as u128);
    let a = rng.next_u64();
    let b = rng.next_u64();
    box_muller(a, b)
}

pub fn sample_family(seed: u64, modes: usize, q: u32, horizon: f64) -> Result<BrownianFamily> {
    sample_family_replica(seed, 0, modes, q, horizon)
}

/// Family for one Monte Carlo replica; replicas differ in the key only.
pub fn sample_family_replica(seed: u64, replica: u64, modes: usize, q: u32, horizon: f64) -> Result<BrownianFamily> {
    if modes < 1 {
        return Err(Error::domain("a Brownian family needs at least one mode"));
    }
    if !(1..=30).contains(&q) {
        return Err(Error::domain(format!("fine level must lie in 1..=30, got {q}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
    }
    let steps = 1usize << q;
    let delta = horizon / steps as f64;
    let sd = delta.sqrt();
    let mut incr = Vec::with_capacity(modes * steps);
    for j in 1..=modes {
        let mut rng = ChaCha8Rng::from_seed(key(seed, replica));
        rng.set_stream(j as u64);
        for _ in 0..steps {
            let a = rng.next_u64();
            let b = rng.next_u64();
            incr.push(sd * box_muller(a, b));
        }
    }
    let record = SeedRecord { root_seed: seed, replica, modes, fine_level: q, horizon_bits: horizon.to_bits() };
    Ok(BrownianFamily { record, delta, steps, incr })
}

impl SeedRecord {
    /// Regenerates the single increment `ΔW_j` of fine step `step`.
    pub fn increment(&self, j: usize, step: usize) -> f64 {
        let delta = self.horizon() / (1u64 << self.fine_level) as f64;
        delta.sqrt() * standard_normal_at(self.root_seed, self.replica, j, step)
    }
}

impl BrownianFamily {
    /// Family with prescribed increments, for deterministic checks.
    pub fn from_increments(record: SeedRecord, incr: Vec<f64>) -> Result<Self> {
        let steps = 1usize << record.fine_level;
        if incr.len() != record.modes * steps {
            return Err(Error::Shape(format!(
                "expected {} increments, got {}",
                record.modes * steps,
                incr.len()
            )));
        }
        Ok(BrownianFamily { record, delta: record.horizon() / steps as f64, steps, incr })
    }

    pub fn zeros(modes: usize, q: u32, horizon: f64) -> Self {
        let record = SeedRecord { root_seed: 0, replica: 0, modes, fine_level: q, horizon_bits: horizon.to_bits() };
        let steps = 1usize << q;
        BrownianFamily { record, delta: horizon / steps as f64, steps, incr: vec![0.0; modes * steps] }
    }

    #[inline]
    pub fn record(&self) -> &SeedRecord {
        &self.record
    }

    #[inline]
    pub fn modes(&self) -> usize {
        self.record.modes
    }

    #[inline]
    pub fn fine_level(&self) -> u32 {
        self.record.fine_level
    }

    #[inline]
    pub fn steps(&self) -> usize {
        self.steps
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn horizon(&self) -> f64 {
        self.record.horizon()
    }

    /// `ΔW_j` over fine step `step` (`j` is 1-based).
    #[inline]
    pub fn increment(&self, j: usize, step: usize) -> f64 {
        self.incr[(j - 1) * self.steps + step]
    }

    pub fn increments(&self, j: usize) -> &[f64] {
        &self.incr[(j - 1) * self.steps..j * self.steps]
    }

    pub fn increments_mut(&mut self, j: usize) -> &mut [f64] {
        let s = self.steps;
        &mut self.incr[(j - 1) * s..j * s]
    }

    /// `W_j(Δ_i)` at level `n`: the in-order sum of the contained fine increments.
    pub fn coarse_increment(&self, j: usize, n: u32, i: usize) -> f64 {
        let per = 1usize << (self.record.fine_level - n);
        self.increments(j)[i * per..(i + 1) * per].iter().sum()
    }
}
