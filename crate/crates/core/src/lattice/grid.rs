use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic cube of side `L` sampled at `N` points per axis.
///
/// Flat storage is row-major with the last axis fastest: `(i*N + j)*N + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    side: f64,
    n: usize,
    h: f64,
}

impl TorusGrid {
    pub fn new(side: f64, n: usize) -> Result<Self> {
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::domain(format!("side length must be positive, got {side}")));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::domain(format!("points per axis must be even and >= 4, got {n}")));
        }
        Ok(TorusGrid { side, n, h: side / n as f64 })
    }

    #[inline]
    pub fn side(&self) -> f64 {
        self.side
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn unflat(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Flat index of a (possibly negative or out of range) lattice triple.
    #[inline]
    pub fn wrap(&self, i: i64, j: i64, k: i64) -> usize {
        let n = self.n as i64;
        self.flat(i.rem_euclid(n) as usize, j.rem_euclid(n) as usize, k.rem_euclid(n) as usize)
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unflat(idx);
        [i as f64 * self.h, j as f64 * self.h, k as f64 * self.h]
    }

    /// Signed frequency index in `{-N/2, …, N/2-1}` for a storage index.
    #[inline]
    pub fn freq(&self, i: usize) -> i64 {
        let half = self.n / 2;
        if i < half {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn freq3(&self, idx: usize) -> [i64; 3] {
        let [i, j, k] = self.unflat(idx);
        [self.freq(i), self.freq(j), self.freq(k)]
    }

    /// Spacing of the frequency lattice, `2π/L`.
    #[inline]
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.side
    }

    /// Volume of one frequency cell, `(2π/L)³`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dxi().powi(3)
    }

    /// `|ξ|` for the frequency stored at `idx`.
    pub fn omega(&self, idx: usize) -> f64 {
        let k = self.freq3(idx);
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        self.dxi() * k2.sqrt()
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.omega(i)).collect()
    }

    /// Minimal-image representative of a coordinate difference.
    #[inline]
    pub fn min_image(&self, d: f64) -> f64 {
        d - self.side * (d / self.side).round()
    }

    pub fn torus_distance(&self, x: [f64; 3], y: [f64; 3]) -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            let d = self.min_image(x[a] - y[a]);
            s += d * d;
        }
        s.sqrt()
    }

    pub fn same_as(&self, other: &TorusGrid) -> bool {
        self.n == other.n && self.side == other.side
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(TorusGrid::new(1.0, 3).is_err());
        assert!(TorusGrid::new(1.0, 7).is_err());
        assert!(TorusGrid::new(-1.0, 8).is_err());
        assert!(TorusGrid::new(1.0, 2).is_err());
    }

    #[test]
    fn spacing_times_n_is_side() {
        let g = TorusGrid::new(4.0, 32).unwrap();
        assert_eq!(g.spacing() * 32.0, 4.0);
    }

    #[test]
    fn flat_roundtrip_and_freqs() {
        let g = TorusGrid::new(1.0, 8).unwrap();
        for idx in 0..g.len() {
            let [i, j, k] = g.unflat(idx);
            assert_eq!(g.flat(i, j, k), idx);
        }
        let fs: Vec<i64> = (0..8).map(|i| g.freq(i)).collect();
        assert_eq!(fs, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(g.wrap(-1, 8, 3), g.flat(7, 0, 3));
    }

    #[test]
    fn min_image_distance() {
        let g = TorusGrid::new(10.0, 8).unwrap();
        let d = g.torus_distance([0.5, 0.0, 0.0], [9.5, 0.0, 0.0]);
        assert!((d - 1.0).abs() < 1e-12);
    }
}
