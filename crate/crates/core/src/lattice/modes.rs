use std::f64::consts::SQRT_2;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::TorusGrid;
use super::weights::SpectralWeights;
use crate::error::{Error, Result};

/// One real trigonometric mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeLabel {
    Const,
    /// `√2 cos(ξ_k·x)` for lexicographically positive `k`.
    Cos([i64; 3]),
    /// `√2 sin(ξ_k·x)` for lexicographically positive `k`.
    Sin([i64; 3]),
}

impl ModeLabel {
    pub fn k(&self) -> [i64; 3] {
        match *self {
            ModeLabel::Const => [0, 0, 0],
            ModeLabel::Cos(k) | ModeLabel::Sin(k) => k,
        }
    }
}

fn lex_positive(k: [i64; 3]) -> bool {
    k.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// Bijection `j ↦ mode`, 1-based, ordered by `|k|` then lexicographically on
/// the lattice vector. A lattice vector `k` labels `cos` when lexicographically
/// positive and `sin` of `-k` otherwise, so each real pair is a cos/sin twin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeIndexMap {
    grid: TorusGrid,
    k_max: f64,
    labels: Vec<ModeLabel>,
}

impl ModeIndexMap {
    /// All modes with `|k| ≤ k_max` (index units), Nyquist planes excluded.
    pub fn new(grid: &TorusGrid, k_max: f64) -> Result<Self> {
        if !(k_max >= 0.0) {
            return Err(Error::domain(format!("k_max must be >= 0, got {k_max}")));
        }
        let half = (grid.n() / 2) as i64;
        let r = (k_max.floor() as i64).min(half - 1);
        let mut ks = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    let k2 = (a * a + b * b + c * c) as f64;
                    if k2 <= k_max * k_max + 1e-9 {
                        ks.push([a, b, c]);
                    }
                }
            }
        }
        ks.sort_by(|x, y| {
            let nx = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            let ny = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
            nx.cmp(&ny).then(x.cmp(y))
        });
        let labels = ks
            .into_iter()
            .map(|k| {
                if k == [0, 0, 0] {
                    ModeLabel::Const
                } else if lex_positive(k) {
                    ModeLabel::Cos(k)
                } else {
                    ModeLabel::Sin([-k[0], -k[1], -k[2]])
                }
            })
            .collect();
        Ok(ModeIndexMap { grid: *grid, k_max, labels })
    }

    /// The first `count` modes of the full ordering.
    pub fn first(grid: &TorusGrid, count: usize) -> Result<Self> {
        let mut r = 0.0;
        loop {
            let m = Self::new(grid, r)?;
            if m.len() >= count {
                return Ok(ModeIndexMap { grid: *grid, k_max: r, labels: m.labels[..count].to_vec() });
            }
            if r > grid.n() as f64 {
                return Err(Error::domain(format!("grid has fewer than {count} non-Nyquist modes")));
            }
            r += 1.0;
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Label of mode `j` (1-based).
    pub fn label(&self, j: usize) -> ModeLabel {
        self.labels[j - 1]
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn index_of(&self, label: ModeLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label).map(|p| p + 1)
    }

    /// Weight `ŵ(k_j)` of mode `j`.
    pub fn weight(&self, j: usize, w: &SpectralWeights) -> f64 {
        w.at_k(self.label(j).k())
    }

    /// Unnormalised pattern: `1`, `√2 cos(ξ·x)` or `√2 sin(ξ·x)`.
    pub fn pattern_at(&self, j: usize, x: [f64; 3]) -> f64 {
        let dxi = self.grid.dxi();
        match self.label(j) {
            ModeLabel::Const => 1.0,
            ModeLabel::Cos(k) => SQRT_2 * (dxi * dot(k, x)).cos(),
            ModeLabel::Sin(k) => SQRT_2 * (dxi * dot(k, x)).sin(),
        }
    }

    pub fn pattern(&self, j: usize) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.pattern_at(j, self.grid.point(i))).collect()
    }

    /// Forcing pattern `f_j = (ŵ_j·cell)^{1/2}·pattern_j`.
    ///
    /// A noise with coefficients `c_j` acts on a test function `φ` through
    /// `Σ_j c_j ∫ φ f_j`, the same pairing as `⟨φ, Σ_j c_j e_j⟩_ℋ`.
    pub fn forcing_patterns(&self, w: &SpectralWeights) -> Vec<Vec<f64>> {
        let cv = self.grid.cell_volume();
        (1..=self.len())
            .map(|j| {
                let s = (self.weight(j, w) * cv).sqrt();
                self.pattern(j).into_iter().map(|v| v * s).collect()
            })
            .collect()
    }

    /// Factor turning pattern `j` into the ℋ-orthonormal element `e_j`.
    pub fn unit_scale(&self, j: usize, w: &SpectralWeights) -> f64 {
        let l3 = self.grid.side().powi(3);
        1.0 / (l3 * (self.weight(j, w) * self.grid.cell_volume()).sqrt())
    }

    /// Adds `c · pattern_j` to a unitary spectrum.
    pub fn add_pattern_spectrum(&self, spec: &mut [Complex64], j: usize, c: f64) {
        let g = &self.grid;
        let root = (g.len() as f64).sqrt();
        match self.label(j) {
            ModeLabel::Const => spec[0] += Complex64::new(c * root, 0.0),
            ModeLabel::Cos(k) => {
                let a = c * root / SQRT_2;
                spec[g.wrap(k[0], k[1], k[2])] += Complex64::new(a, 0.0);
                spec[g.wrap(-k[0], -k[1], -k[2])] += Complex64::new(a, 0.0);
            }
            ModeLabel::Sin(k) => {
                let a = c * root / SQRT_2;
                spec[g.wrap(k[0], k[1], k[2])] += Complex64::new(0.0, -a);
                spec[g.wrap(-k[0], -k[1], -k[2])] += Complex64::new(0.0, a);
            }
        }
    }
}

#[inline]
fn dot(k: [i64; 3], x: [f64; 3]) -> f64 {
    k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Fft3;

    #[test]
    fn first_shell_has_seven_modes_and_const_first() {
        let g = TorusGrid::new(4.0, 16).unwrap();
        let m = ModeIndexMap::new(&g, 1.0).unwrap();
        assert_eq!(m.len(), 7);
        assert_eq!(m.label(1), ModeLabel::Const);
        let mut seen = std::collections::HashSet::new();
        for l in m.labels() {
            assert!(seen.insert(format!("{l:?}")));
        }
        assert_eq!(m.index_of(ModeLabel::Cos([1, 0, 0])), Some(7));
    }

    #[test]
    fn order_is_by_radius() {
        let g = TorusGrid::new(4.0, 16).unwrap();
        let m = ModeIndexMap::new(&g, 3.0).unwrap();
        let r2: Vec<i64> = m
            .labels()
            .iter()
            .map(|l| l.k().iter().map(|c| c * c).sum())
            .collect();
        assert!(r2.windows(2).all(|w| w[0] <= w[1]));
        let first = ModeIndexMap::first(&g, 10).unwrap();
        assert_eq!(first.labels(), &m.labels()[..10]);
    }

    #[test]
    fn nyquist_excluded() {
        let g = TorusGrid::new(1.0, 4).unwrap();
        let m = ModeIndexMap::new(&g, 10.0).unwrap();
        assert!(m.labels().iter().all(|l| l.k().iter().all(|c| c.abs() < 2)));
        assert_eq!(m.len(), 27);
    }

    #[test]
    fn pattern_spectrum_matches_transform() {
        let g = TorusGrid::new(3.0, 8).unwrap();
        let m = ModeIndexMap::new(&g, 2.0).unwrap();
        let mut fft = Fft3::new(&g);
        for j in 1..=m.len() {
            let want = fft.forward_real(&m.pattern(j));
            let mut got = vec![Complex64::default(); g.len()];
            m.add_pattern_spectrum(&mut got, j, 1.0);
            for i in 0..g.len() {
                assert!((want[i] - got[i]).norm() < 1e-10, "mode {j}");
            }
        }
    }
}
