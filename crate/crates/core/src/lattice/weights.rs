use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// How the density `|ξ|^{β-3}` is reduced to one number per lattice frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CellRule {
    /// Density at the cell centre; the zero mode gets weight 0. Diagnostics only.
    Midpoint,
    /// Average of the density over the frequency cell.
    #[default]
    CellAverage,
}

/// Points per axis of the product rule used away from the origin.
const CELL_ORDER: usize = 8;
/// 1D order of the face rule used for the zero cell.
const FACE_ORDER: usize = 48;

/// Discretised spectral measure `μ(dξ) = |ξ|^{β-3} dξ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralWeights {
    grid: TorusGrid,
    beta: f64,
    rule: CellRule,
    w: Vec<f64>,
}

impl SpectralWeights {
    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn rule(&self) -> CellRule {
        self.rule
    }

    #[inline]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Weight at storage index `idx`.
    #[inline]
    pub fn at(&self, idx: usize) -> f64 {
        self.w[idx]
    }

    /// Weight at signed frequency triple `k`.
    pub fn at_k(&self, k: [i64; 3]) -> f64 {
        self.w[self.grid.wrap(k[0], k[1], k[2])]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }
}

/// `∫_{(-½,½)³} |κ|^{β-3} dκ`.
///
/// The cube is split into six pyramids with apex at the origin; the radial
/// factor integrates to `1/β`, leaving a smooth integral over one face.
pub fn zero_cell_integral(beta: f64) -> f64 {
    let g = GaussLegendre::get(FACE_ORDER);
    let s = beta - 3.0;
    let mut face = 0.0;
    for (y, wy) in g.on(-0.5, 0.5) {
        for (z, wz) in g.on(-0.5, 0.5) {
            face += wy * wz * (0.25 + y * y + z * z).powf(0.5 * s);
        }
    }
    6.0 * 0.5 / beta * face
}

/// Average of `|κ|^{β-3}` over the unit cube centred at an integer `k ≠ 0`.
fn cell_average(k: [i64; 3], beta: f64) -> f64 {
    let g = GaussLegendre::get(CELL_ORDER);
    let s = 0.5 * (beta - 3.0);
    let mut acc = 0.0;
    for (x, wx) in g.on(k[0] as f64 - 0.5, k[0] as f64 + 0.5) {
        for (y, wy) in g.on(k[1] as f64 - 0.5, k[1] as f64 + 0.5) {
            let xy = x * x + y * y;
            let wxy = wx * wy;
            for (z, wz) in g.on(k[2] as f64 - 0.5, k[2] as f64 + 0.5) {
                acc += wxy * wz * (xy + z * z).powf(s);
            }
        }
    }
    acc
}

pub fn make_weights(grid: &TorusGrid, beta: f64, rule: CellRule) -> Result<SpectralWeights> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(Error::domain(format!("beta must lie in (0, 2), got {beta}")));
    }
    let scale = grid.dxi().powf(beta - 3.0);
    let mut cache: HashMap<[i64; 3], f64> = HashMap::new();
    let mut w = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let k = grid.freq3(idx);
        let mut key = [k[0].abs(), k[1].abs(), k[2].abs()];
        key.sort_unstable();
        let v = *cache.entry(key).or_insert_with(|| match (rule, key == [0, 0, 0]) {
            (CellRule::Midpoint, true) => 0.0,
            (CellRule::Midpoint, false) => {
                let k2 = (key[0] * key[0] + key[1] * key[1] + key[2] * key[2]) as f64;
                k2.powf(0.5 * (beta - 3.0))
            }
            (CellRule::CellAverage, true) => zero_cell_integral(beta),
            (CellRule::CellAverage, false) => cell_average(key, beta),
        });
        w.push(scale * v);
    }
    Ok(SpectralWeights { grid: *grid, beta, rule, w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Adaptive-quadrature reference values of ∫_{(-½,½)³}|κ|^{β-3}dκ.
    const ZERO_CELL: [(f64, f64); 3] = [
        (0.5, 19.60264633957704),
        (1.0, 7.674124222443731),
        (1.5, 4.021392044755755),
    ];

    #[test]
    fn zero_cell_matches_reference() {
        for (beta, want) in ZERO_CELL {
            let got = zero_cell_integral(beta);
            assert!((got - want).abs() / want < 1e-10, "beta={beta}: {got} vs {want}");
        }
    }

    #[test]
    fn zero_mode_weight_on_2pi_box() {
        let g = TorusGrid::new(2.0 * PI, 8).unwrap();
        let w = make_weights(&g, 1.0, CellRule::CellAverage).unwrap();
        assert!((w.at(0) - 7.674124222443731).abs() < 1e-9);
    }

    #[test]
    fn rejects_beta_outside_range() {
        let g = TorusGrid::new(1.0, 8).unwrap();
        for b in [0.0, 2.0, -0.1, 2.5, f64::NAN] {
            assert!(make_weights(&g, b, CellRule::CellAverage).is_err());
        }
    }

    #[test]
    fn symmetric_positive_and_monotone() {
        for n in [8usize, 16] {
            let g = TorusGrid::new(5.0, n).unwrap();
            for beta in [0.5, 1.0, 1.5] {
                let w = make_weights(&g, beta, CellRule::CellAverage).unwrap();
                let mut by_radius = Vec::new();
                for idx in 0..g.len() {
                    let k = g.freq3(idx);
                    let v = w.at(idx);
                    assert!(v > 0.0);
                    assert_eq!(v, w.at_k([-k[0], -k[1], -k[2]]));
                    if k != [0, 0, 0] {
                        by_radius.push(((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]), v));
                    }
                }
                by_radius.sort_by(|a, b| a.0.cmp(&b.0));
                // (radius², min, max) per shell
                let mut shells: Vec<(i64, f64, f64)> = Vec::new();
                for (r2, v) in by_radius {
                    match shells.last_mut() {
                        Some(s) if s.0 == r2 => {
                            s.1 = s.1.min(v);
                            s.2 = s.2.max(v);
                        }
                        _ => shells.push((r2, v, v)),
                    }
                }
                for pair in shells.windows(2) {
                    assert!(pair[1].2 <= pair[0].1, "n={n} beta={beta} {:?}", pair);
                }
            }
        }
    }

    #[test]
    fn beta_dependence_flips_at_unit_frequency() {
        // x^{β-3} grows with β only for x > 1; below 1 it shrinks.
        let g = TorusGrid::new(10.0, 16).unwrap();
        let lo = make_weights(&g, 0.5, CellRule::CellAverage).unwrap();
        let hi = make_weights(&g, 1.5, CellRule::CellAverage).unwrap();
        // |ξ| = 2π/10 < 1
        assert!(hi.at_k([1, 0, 0]) < lo.at_k([1, 0, 0]));
        // |ξ| = 2π·3/10 > 1
        assert!(hi.at_k([3, 0, 0]) > lo.at_k([3, 0, 0]));
    }

    #[test]
    fn midpoint_zero_mode_is_zero() {
        let g = TorusGrid::new(2.0 * PI, 8).unwrap();
        let w = make_weights(&g, 1.0, CellRule::Midpoint).unwrap();
        assert_eq!(w.at(0), 0.0);
        assert!((w.at_k([0, 2, 0]) - 0.25).abs() < 1e-14);
    }
}
