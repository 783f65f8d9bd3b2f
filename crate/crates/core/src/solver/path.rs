use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use npyz::WriterBuilder;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::TorusGrid;
use crate::noise::SeedRecord;
use crate::norms::BoxRegion;

/// Lattice sub-box `lo ..= lo + len - 1` in unwrapped coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotBox {
    pub lo: [i64; 3],
    pub len: [usize; 3],
}

impl SnapshotBox {
    /// Box covering `K(0) = K + B_T` plus one cell, capped at the grid.
    pub fn padded(grid: &TorusGrid, window: &BoxRegion, horizon: f64) -> Self {
        let h = grid.spacing();
        let mut lo = [0i64; 3];
        let mut len = [0usize; 3];
        for a in 0..3 {
            let l = ((window.lo[a] - horizon) / h).floor() as i64 - 1;
            let r = ((window.hi[a] + horizon) / h).ceil() as i64 + 1;
            let n = ((r - l + 1) as usize).min(grid.n());
            lo[a] = if n == grid.n() { 0 } else { l };
            len[a] = n;
        }
        SnapshotBox { lo, len }
    }

    pub fn whole(grid: &TorusGrid) -> Self {
        SnapshotBox { lo: [0; 3], len: [grid.n(); 3] }
    }

    pub fn count(&self) -> usize {
        self.len[0] * self.len[1] * self.len[2]
    }

    /// Position of `c` inside the box, if present.
    pub fn local(&self, c: [i64; 3]) -> Option<usize> {
        let mut r = [0usize; 3];
        for a in 0..3 {
            let d = c[a] - self.lo[a];
            if d < 0 || d as usize >= self.len[a] {
                return None;
            }
            r[a] = d as usize;
        }
        Some((r[0] * self.len[1] + r[1]) * self.len[2] + r[2])
    }

    /// Unwrapped cells in storage order.
    pub fn cells(&self) -> impl Iterator<Item = [i64; 3]> + '_ {
        let [a, b, c] = self.len;
        (0..a).flat_map(move |i| {
            (0..b).flat_map(move |j| {
                (0..c).map(move |k| [self.lo[0] + i as i64, self.lo[1] + j as i64, self.lo[2] + k as i64])
            })
        })
    }

    /// Copies the box out of a full grid field.
    pub fn extract(&self, grid: &TorusGrid, full: &[f64]) -> Vec<f64> {
        self.cells().map(|c| full[grid.wrap(c[0], c[1], c[2])]).collect()
    }
}

/// Recorded field values at the snapshot times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSolution {
    pub grid: TorusGrid,
    pub horizon: f64,
    pub fine_level: u32,
    pub steps: Vec<usize>,
    pub times: Vec<f64>,
    pub region: SnapshotBox,
    /// Snapshot-major, each snapshot in [`SnapshotBox::cells`] order.
    #[serde(skip)]
    pub values: Vec<f64>,
    /// `Lₙ(t)` at each snapshot; all true when no noise was involved.
    pub localized: Vec<bool>,
    pub seed: Option<SeedRecord>,
    pub config_hash: Option<String>,
}

impl PathSolution {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn snapshot(&self, k: usize) -> &[f64] {
        let m = self.region.count();
        &self.values[k * m..(k + 1) * m]
    }

    pub fn snapshot_mut(&mut self, k: usize) -> &mut [f64] {
        let m = self.region.count();
        &mut self.values[k * m..(k + 1) * m]
    }

    pub fn index_of_step(&self, step: usize) -> Option<usize> {
        self.steps.iter().position(|&s| s == step)
    }

    /// Value of snapshot `k` at unwrapped cell `c`.
    pub fn at(&self, k: usize, c: [i64; 3]) -> Result<f64> {
        let i = self
            .region
            .local(c)
            .ok_or_else(|| Error::domain(format!("cell {c:?} lies outside the recorded region")))?;
        Ok(self.snapshot(k)[i])
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &PathSolution) -> Result<f64> {
        if self.region != other.region || self.steps != other.steps {
            return Err(Error::Shape("paths recorded on different regions or times".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| v.abs().max(m))
    }

    fn paths(stem: &Path) -> (PathBuf, PathBuf) {
        (stem.with_extension("npy"), stem.with_extension("json"))
    }

    /// Writes `stem.npy` (shape `[snapshots, nx, ny, nz]`) and `stem.json`.
    pub fn write(&self, stem: impl AsRef<Path>) -> Result<()> {
        let (npy, json) = Self::paths(stem.as_ref());
        let shape = [self.len() as u64, self.region.len[0] as u64, self.region.len[1] as u64, self.region.len[2] as u64];
        let mut w = npyz::WriteOptions::new()
            .default_dtype()
            .shape(&shape)
            .writer(BufWriter::new(File::create(npy)?))
            .begin_nd()?;
        w.extend(self.values.iter().copied())?;
        w.finish()?;
        serde_json::to_writer_pretty(BufWriter::new(File::create(json)?), self)?;
        Ok(())
    }

    pub fn read(stem: impl AsRef<Path>) -> Result<Self> {
        let (npy, json) = Self::paths(stem.as_ref());
        let mut p: PathSolution = serde_json::from_reader(BufReader::new(File::open(json)?))?;
        let arr = npyz::NpyFile::new(BufReader::new(File::open(npy)?))?;
        p.values = arr.into_vec::<f64>()?;
        if p.values.len() != p.len() * p.region.count() {
            return Err(Error::Shape("array length does not match the sidecar".into()));
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padded_box_covers_the_light_cone() {
        let g = TorusGrid::new(4.0, 32).unwrap();
        let k = BoxRegion::cube([2.0; 3], 1.0).unwrap();
        let b = SnapshotBox::padded(&g, &k, 1.0);
        // K(0) spans [0.5, 3.5]: cells 4..=28, padded to 3..=29
        assert_eq!(b.lo, [3; 3]);
        assert_eq!(b.len, [27; 3]);
        assert_eq!(b.local([3, 3, 3]), Some(0));
        assert_eq!(b.local([2, 3, 3]), None);
        assert_eq!(b.cells().count(), b.count());
    }

    #[test]
    fn write_read_round_trip() {
        let g = TorusGrid::new(4.0, 8).unwrap();
        let region = SnapshotBox { lo: [-1, 0, 2], len: [2, 3, 4] };
        let p = PathSolution {
            grid: g,
            horizon: 1.0,
            fine_level: 4,
            steps: vec![0, 16],
            times: vec![0.0, 1.0],
            region,
            values: (0..48).map(|i| i as f64 * 0.25 - 3.0).collect(),
            localized: vec![true, false],
            seed: None,
            config_hash: Some("abc".into()),
        };
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("path");
        p.write(&stem).unwrap();
        let q = PathSolution::read(&stem).unwrap();
        assert_eq!(p, q);
        assert_eq!(q.at(1, [0, 2, 5]).unwrap(), p.snapshot(1)[region.local([0, 2, 5]).unwrap()]);
    }
}
