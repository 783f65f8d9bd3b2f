use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::TorusGrid;

/// Axis-aligned box `[lo, hi]` in physical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl BoxRegion {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        for a in 0..3 {
            if !(lo[a] <= hi[a]) || !lo[a].is_finite() || !hi[a].is_finite() {
                return Err(Error::domain(format!("box corners out of order on axis {a}: {} > {}", lo[a], hi[a])));
            }
        }
        Ok(BoxRegion { lo, hi })
    }

    /// Cube of side `side` centred at `c`.
    pub fn cube(c: [f64; 3], side: f64) -> Result<Self> {
        let r = 0.5 * side;
        BoxRegion::new([c[0] - r, c[1] - r, c[2] - r], [c[0] + r, c[1] + r, c[2] + r])
    }

    pub fn point(x: [f64; 3]) -> Self {
        BoxRegion { lo: x, hi: x }
    }

    pub fn diameter(&self) -> f64 {
        (0..3).map(|a| (self.hi[a] - self.lo[a]).powi(2)).sum::<f64>().sqrt()
    }

    /// Euclidean distance from `x` to the box in ℝ³.
    pub fn distance(&self, x: [f64; 3]) -> f64 {
        (0..3)
            .map(|a| {
                let d = (self.lo[a] - x[a]).max(x[a] - self.hi[a]).max(0.0);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Distance on the torus: the nearest periodic copy of the box.
    pub fn torus_distance(&self, grid: &TorusGrid, x: [f64; 3]) -> f64 {
        let l = grid.side();
        (0..3)
            .map(|a| {
                let d = [-l, 0.0, l]
                    .iter()
                    .map(|s| (self.lo[a] - x[a] - s).max(x[a] + s - self.hi[a]).max(0.0))
                    .fold(f64::INFINITY, f64::min);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Finite set of grid cells, in unwrapped lattice coordinates so that
/// differences are true displacements.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSet {
    grid: TorusGrid,
    cells: Vec<[i64; 3]>,
}

// Boundary ties are resolved inclusively with this slack (in units of h).
const TIE: f64 = 1e-9;

impl CellSet {
    pub fn new(grid: TorusGrid, cells: impl IntoIterator<Item = [i64; 3]>) -> Self {
        let set: BTreeSet<[i64; 3]> = cells.into_iter().collect();
        CellSet { grid, cells: set.into_iter().collect() }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Sorted lexicographically.
    pub fn cells(&self) -> &[[i64; 3]] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: [i64; 3]) -> bool {
        self.cells.binary_search(&c).is_ok()
    }

    pub fn point(&self, c: [i64; 3]) -> [f64; 3] {
        let h = self.grid.spacing();
        [c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h]
    }

    /// Flat index of the torus point a cell lands on.
    pub fn flat(&self, c: [i64; 3]) -> usize {
        self.grid.wrap(c[0], c[1], c[2])
    }

    /// `|𝒪|` as a sum of cell volumes.
    pub fn volume(&self) -> f64 {
        self.len() as f64 * self.grid.spacing().powi(3)
    }

    pub fn symmetric_difference(&self, other: &CellSet) -> usize {
        let a: BTreeSet<_> = self.cells.iter().collect();
        let b: BTreeSet<_> = other.cells.iter().collect();
        a.symmetric_difference(&b).count()
    }

    /// Inclusive lattice bounding box.
    pub fn bounds(&self) -> Option<([i64; 3], [i64; 3])> {
        let first = *self.cells.first()?;
        let (mut lo, mut hi) = (first, first);
        for c in &self.cells {
            for a in 0..3 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        Some((lo, hi))
    }
}

/// `K(t) = {x : d(x, K) ≤ T − t}` on the grid.
pub fn shrinking_set(grid: &TorusGrid, k: &BoxRegion, t: f64, horizon: f64) -> Result<CellSet> {
    if !(0.0..=horizon).contains(&t) {
        return Err(Error::domain(format!("time {t} outside [0, {horizon}]")));
    }
    let h = grid.spacing();
    let r = horizon - t;
    let mut cells = Vec::new();
    let lo: Vec<i64> = (0..3).map(|a| ((k.lo[a] - r) / h).floor() as i64 - 1).collect();
    let hi: Vec<i64> = (0..3).map(|a| ((k.hi[a] + r) / h).ceil() as i64 + 1).collect();
    for i in lo[0]..=hi[0] {
        for j in lo[1]..=hi[1] {
            for l in lo[2]..=hi[2] {
                let x = [i as f64 * h, j as f64 * h, l as f64 * h];
                if k.distance(x) <= r + TIE * h {
                    cells.push([i, j, l]);
                }
            }
        }
    }
    Ok(CellSet::new(*grid, cells))
}

/// `𝒪^ε`: cells within distance `eps` of some cell of `O`.
pub fn enlarge_set(o: &CellSet, eps: f64) -> Result<CellSet> {
    if !(eps >= 0.0) {
        return Err(Error::domain(format!("enlargement must be >= 0, got {eps}")));
    }
    let h = o.grid.spacing();
    let m = (eps / h + TIE).floor() as i64;
    let lim = (eps / h).powi(2) + TIE;
    let mut offsets = Vec::new();
    for i in -m..=m {
        for j in -m..=m {
            for l in -m..=m {
                if ((i * i + j * j + l * l) as f64) <= lim {
                    offsets.push([i, j, l]);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for c in &o.cells {
        for d in &offsets {
            out.insert([c[0] + d[0], c[1] + d[1], c[2] + d[2]]);
        }
    }
    Ok(CellSet { grid: o.grid, cells: out.into_iter().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TorusGrid {
        TorusGrid::new(4.0, 32).unwrap()
    }

    fn window() -> BoxRegion {
        BoxRegion::cube([2.0, 2.0, 2.0], 1.0).unwrap()
    }

    #[test]
    fn at_horizon_the_set_is_the_box() {
        let g = grid();
        let s = shrinking_set(&g, &window(), 1.0, 1.0).unwrap();
        // 1.0/0.125 + 1 = 9 lattice points per axis
        assert_eq!(s.len(), 9 * 9 * 9);
        let (lo, hi) = s.bounds().unwrap();
        assert_eq!(lo, [12, 12, 12]);
        assert_eq!(hi, [20, 20, 20]);
    }

    #[test]
    fn point_window_gives_a_ball() {
        let g = grid();
        let s = shrinking_set(&g, &BoxRegion::point([2.0, 2.0, 2.0]), 0.0, 0.5).unwrap();
        for &c in s.cells() {
            let x = s.point(c);
            let r = ((x[0] - 2.0).powi(2) + (x[1] - 2.0).powi(2) + (x[2] - 2.0).powi(2)).sqrt();
            assert!(r <= 0.5 + 1e-9);
        }
        // lattice points of norm ≤ 4 in units of h
        let count = (-4i64..=4)
            .flat_map(|i| (-4i64..=4).flat_map(move |j| (-4i64..=4).map(move |l| i * i + j * j + l * l)))
            .filter(|&r2| r2 <= 16)
            .count();
        assert_eq!(s.len(), count);
    }

    #[test]
    fn sets_are_nested_in_time() {
        let g = grid();
        let ts: Vec<f64> = (0..=16).map(|i| i as f64 / 16.0).collect();
        let sets: Vec<_> = ts.iter().map(|&t| shrinking_set(&g, &window(), t, 1.0).unwrap()).collect();
        for w in sets.windows(2) {
            assert!(w[1].cells().iter().all(|&c| w[0].contains(c)));
        }
    }

    #[test]
    fn enlargement_undoes_shrinking_up_to_a_shell() {
        let g = grid();
        let k = window();
        for (t, s) in [(0.75, 0.25), (1.0, 0.5), (0.6, 0.1)] {
            let kt = shrinking_set(&g, &k, t, 1.0).unwrap();
            let ks = shrinking_set(&g, &k, t - s, 1.0).unwrap();
            let grown = enlarge_set(&kt, s).unwrap();
            let shell = enlarge_set(&ks, g.spacing()).unwrap().len() - ks.len();
            assert!(grown.symmetric_difference(&ks) <= shell, "t={t} s={s}");
        }
    }

    #[test]
    fn enlargement_is_monotone_and_trivial_at_zero() {
        let g = grid();
        let kt = shrinking_set(&g, &window(), 0.8, 1.0).unwrap();
        assert_eq!(enlarge_set(&kt, 0.0).unwrap(), kt);
        let mut prev = kt.clone();
        for i in 1..6 {
            let e = enlarge_set(&kt, 0.05 * i as f64).unwrap();
            assert!(prev.cells().iter().all(|&c| e.contains(c)));
            prev = e;
        }
    }

    #[test]
    fn torus_distance_sees_wrapped_copies() {
        let g = grid();
        let k = BoxRegion::cube([0.25, 2.0, 2.0], 0.5).unwrap();
        assert!((k.torus_distance(&g, [3.9, 2.0, 2.0]) - 0.1).abs() < 1e-12);
        assert!((k.distance([3.9, 2.0, 2.0]) - 3.4).abs() < 1e-12);
    }
}
