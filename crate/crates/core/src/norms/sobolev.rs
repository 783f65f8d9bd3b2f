use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

use super::sets::CellSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevNorm {
    pub seminorm: f64,
    pub lp: f64,
    /// `(‖g‖_p^p + [g]^p)^{1/p}`
    pub full: f64,
    pub p: f64,
}

impl SobolevNorm {
    /// `‖g‖^p`, the quantity whose moments the studies average.
    pub fn full_pow(&self) -> f64 {
        self.lp_pow() + self.seminorm_pow()
    }

    fn lp_pow(&self) -> f64 {
        self.lp.powf(self.p)
    }

    fn seminorm_pow(&self) -> f64 {
        self.seminorm.powf(self.p)
    }
}

#[inline]
fn abs_pow(x: f64, p: f64, ip: Option<i32>) -> f64 {
    match ip {
        Some(k) => x.abs().powi(k),
        None => x.abs().powf(p),
    }
}

/// Gagliardo seminorm and `W^{γ,p}` norm of lattice values on `set`.
///
/// `values[i]` belongs to `set.cells()[i]`. The double integral becomes a
/// sum over ordered cell pairs weighted by `h⁶`; pairs closer than one
/// spacing are dropped and distances use the minimal torus image.
pub fn frac_sobolev(values: &[f64], set: &CellSet, gamma: f64, p: f64) -> Result<SobolevNorm> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::domain(format!("p must be at least 1, got {p}")));
    }
    if values.len() != set.len() {
        return Err(Error::Shape(format!("{} values for {} cells", values.len(), set.len())));
    }
    let Some((lo, hi)) = set.bounds() else {
        return Err(Error::domain("empty region"));
    };
    let grid = set.grid();
    let n = grid.n() as i64;
    let dims = [0, 1, 2].map(|a| (hi[a] - lo[a] + 1) as usize);
    if dims.iter().any(|&d| d as i64 > n) {
        return Err(Error::domain("region wraps the torus more than once"));
    }
    let h = grid.spacing();
    let ip = (p.fract() == 0.0 && p <= 64.0).then_some(p as i32);

    // dense box with a membership mask
    let vol = dims[0] * dims[1] * dims[2];
    let mut mask = vec![false; vol];
    let mut dense = vec![0.0; vol];
    let at = |c: [i64; 3]| {
        (((c[0] - lo[0]) as usize * dims[1]) + (c[1] - lo[1]) as usize) * dims[2] + (c[2] - lo[2]) as usize
    };
    for (c, &v) in set.cells().iter().zip(values) {
        let i = at(*c);
        mask[i] = true;
        dense[i] = v;
    }

    let lp_pow = values.iter().map(|&v| abs_pow(v, p, ip)).sum::<f64>() * h.powi(3);

    let exponent = 3.0 + gamma * p;
    let min_image = |d: i64| {
        let r = d.rem_euclid(n);
        if r > n / 2 {
            r - n
        } else {
            r
        }
    };
    let [d0, d1, d2] = dims.map(|d| d as i64);
    let mut offs = Vec::new();
    for a in 0..d0 {
        for b in -(d1 - 1)..d1 {
            for c in -(d2 - 1)..d2 {
                if (a, b, c) <= (0, 0, 0) {
                    continue;
                }
                offs.push([a, b, c]);
            }
        }
    }
    // ordered partials keep the floating-point sum independent of scheduling
    let partials: Vec<f64> = offs
        .par_iter()
        .map(|&[a, b, c]| {
            let r2 = [a, b, c].map(|d| (min_image(d) as f64 * h).powi(2));
            let r = (r2[0] + r2[1] + r2[2]).sqrt();
            if r < h * (1.0 - 1e-9) {
                return 0.0;
            }
            let (b0, b1) = (0.max(-b) as usize, (d1 - 0.max(b)) as usize);
            let (c0, c1) = (0.max(-c) as usize, (d2 - 0.max(c)) as usize);
            let shift = ((a * d1 + b) * d2 + c) as isize;
            let mut s = 0.0;
            for i in 0..(d0 - a) as usize {
                for j in b0..b1 {
                    let row = (i * dims[1] + j) * dims[2];
                    for k in c0..c1 {
                        let x = row + k;
                        let y = (x as isize + shift) as usize;
                        if mask[x] && mask[y] {
                            s += abs_pow(dense[x] - dense[y], p, ip);
                        }
                    }
                }
            }
            s * r.powf(-exponent)
        })
        .collect();
    // each unordered pair stands for two ordered ones
    let semi_pow = 2.0 * partials.iter().sum::<f64>() * h.powi(6);
    let seminorm = semi_pow.powf(1.0 / p);
    let lp = lp_pow.powf(1.0 / p);
    Ok(SobolevNorm { seminorm, lp, full: (lp_pow + semi_pow).powf(1.0 / p), p })
}
