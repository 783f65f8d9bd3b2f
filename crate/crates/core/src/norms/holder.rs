use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

use super::sets::BoxRegion;

pub const DEFAULT_PAIR_BUDGET: usize = 1_000_000;

/// `[t₀, T] × K` together with how densely it is sampled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceTimeWindow {
    pub t0: f64,
    pub horizon: f64,
    pub window: BoxRegion,
    pub times: Vec<f64>,
    /// Spatial sampling stride in grid cells.
    pub stride: usize,
}

impl SpaceTimeWindow {
    pub fn new(t0: f64, horizon: f64, window: BoxRegion, times: Vec<f64>, stride: usize) -> Result<Self> {
        if !(t0 > 0.0 && t0 < horizon) {
            return Err(Error::domain(format!("need 0 < t0 < T, got t0 = {t0}, T = {horizon}")));
        }
        if times.is_empty() || times.iter().any(|&t| t < t0 - 1e-12 || t > horizon + 1e-12) {
            return Err(Error::domain("window times must be non-empty and lie in [t0, T]"));
        }
        if stride == 0 {
            return Err(Error::domain("stride must be positive"));
        }
        Ok(SpaceTimeWindow { t0, horizon, window, times, stride })
    }
}

/// Values on a regular space-time lattice: uniformly spaced times and a
/// box of points with equal spacing on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeSamples {
    pub times: Vec<f64>,
    pub origin: [f64; 3],
    pub spacing: f64,
    pub shape: [usize; 3],
    /// `values[((t*nx + i)*ny + j)*nz + k]`
    pub values: Vec<f64>,
}

impl SpaceTimeSamples {
    pub fn new(times: Vec<f64>, origin: [f64; 3], spacing: f64, shape: [usize; 3], values: Vec<f64>) -> Result<Self> {
        let points = shape[0] * shape[1] * shape[2];
        if times.is_empty() || points == 0 {
            return Err(Error::domain("empty space-time window"));
        }
        if values.len() != times.len() * points {
            return Err(Error::Shape(format!("{} values for {} times x {points} points", values.len(), times.len())));
        }
        if times.len() > 1 {
            let tau = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
            if !(tau > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - tau).abs() > 1e-9 * tau.max(1.0)) {
                return Err(Error::domain("sample times must be increasing and uniformly spaced"));
            }
        }
        if points > 1 && !(spacing > 0.0) {
            return Err(Error::domain("spatial spacing must be positive"));
        }
        Ok(SpaceTimeSamples { times, origin, spacing, shape, values })
    }

    pub fn points(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn tau(&self) -> f64 {
        if self.times.len() > 1 {
            (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64
        } else {
            0.0
        }
    }

    fn index(&self, t: usize, p: [usize; 3]) -> usize {
        ((t * self.shape[0] + p[0]) * self.shape[1] + p[1]) * self.shape[2] + p[2]
    }

    /// `(t, x)` of a flat sample index.
    pub fn coordinates(&self, idx: usize) -> (f64, [f64; 3]) {
        let [nx, ny, nz] = self.shape;
        let k = idx % nz;
        let j = (idx / nz) % ny;
        let i = (idx / (nz * ny)) % nx;
        let t = idx / (nz * ny * nx);
        let h = self.spacing;
        (self.times[t], [self.origin[0] + i as f64 * h, self.origin[1] + j as f64 * h, self.origin[2] + k as f64 * h])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        SpaceTimeSamples { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }
}

/// Lattice displacement `(Δt, Δi, Δj, Δk)` shared by many sample pairs.
#[derive(Debug, Clone, Copy)]
struct Offset {
    d: [i64; 4],
    separation: f64,
    bases: usize,
}

fn offsets(s: &SpaceTimeSamples) -> Vec<Offset> {
    let nt = s.times.len() as i64;
    let [nx, ny, nz] = s.shape.map(|v| v as i64);
    let tau = s.tau();
    let mut out = Vec::new();
    for dt in 0..nt {
        for di in -(nx - 1)..nx {
            for dj in -(ny - 1)..ny {
                for dk in -(nz - 1)..nz {
                    // one representative of each ±pair
                    if (dt, di, dj, dk) <= (0, 0, 0, 0) {
                        continue;
                    }
                    let bases = ((nt - dt) * (nx - di.abs()) * (ny - dj.abs()) * (nz - dk.abs())) as usize;
                    let dx = s.spacing * ((di * di + dj * dj + dk * dk) as f64).sqrt();
                    out.push(Offset { d: [dt, di, dj, dk], separation: dt as f64 * tau + dx, bases });
                }
            }
        }
    }
    out
}

/// Value of pair number `b` among the bases of an offset.
#[inline]
fn pair_at(s: &SpaceTimeSamples, o: &Offset, b: usize) -> (usize, usize) {
    let nt = s.times.len() - o.d[0] as usize;
    let span: Vec<usize> = (0..3).map(|a| s.shape[a] - o.d[a + 1].unsigned_abs() as usize).collect();
    let k = b % span[2];
    let j = (b / span[2]) % span[1];
    let i = (b / (span[2] * span[1])) % span[0];
    let t = b / (span[2] * span[1] * span[0]);
    debug_assert!(t < nt);
    let lo = |a: usize, x: usize| if o.d[a + 1] < 0 { x + o.d[a + 1].unsigned_abs() as usize } else { x };
    let p = [lo(0, i), lo(1, j), lo(2, k)];
    let q = [
        (p[0] as i64 + o.d[1]) as usize,
        (p[1] as i64 + o.d[2]) as usize,
        (p[2] as i64 + o.d[3]) as usize,
    ];
    (s.index(t, p), s.index(t + o.d[0] as usize, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairMax {
    pub value: f64,
    pub a: usize,
    pub b: usize,
}

impl PairMax {
    fn none() -> Self {
        PairMax { value: 0.0, a: usize::MAX, b: usize::MAX }
    }

    // ties broken by index so the reduction order never matters
    fn better(self, other: PairMax) -> PairMax {
        match self.value.total_cmp(&other.value) {
            std::cmp::Ordering::Greater => self,
            std::cmp::Ordering::Less => other,
            std::cmp::Ordering::Equal => {
                if (self.a, self.b) <= (other.a, other.b) {
                    self
                } else {
                    other
                }
            }
        }
    }
}

fn ratio(v: &[f64], a: usize, b: usize, sep_pow: f64) -> f64 {
    (v[a] - v[b]).abs() / sep_pow
}

/// Max of `|g(a) − g(b)|/sep^ρ` over the selected pairs, with the pair
/// budget split over dyadic separation classes.
fn stratified_max(s: &SpaceTimeSamples, offs: &[Offset], rho: f64, budget: usize, seed: u64) -> (PairMax, usize, bool) {
    let total: usize = offs.iter().map(|o| o.bases).sum();
    if offs.is_empty() {
        return (PairMax::none(), 0, true);
    }
    let exhaustive = total <= budget;
    let smin = offs.iter().map(|o| o.separation).fold(f64::INFINITY, f64::min);
    let class_of = |o: &Offset| ((o.separation / smin).log2() + 1e-9).floor().max(0.0) as usize;
    let nclass = offs.iter().map(class_of).max().unwrap_or(0) + 1;
    let mut classes: Vec<Vec<&Offset>> = vec![Vec::new(); nclass];
    for o in offs {
        classes[class_of(o)].push(o);
    }
    classes.retain(|c| !c.is_empty());
    let sizes: Vec<usize> = classes.iter().map(|c| c.iter().map(|o| o.bases).sum()).collect();
    // smallest classes first, leftover budget flows to the larger ones
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by_key(|&c| (sizes[c], c));
    let mut remaining = budget.max(classes.len());
    let mut quotas = vec![0usize; classes.len()];
    for (rank, &c) in order.iter().enumerate() {
        let share = remaining / (classes.len() - rank);
        quotas[c] = if exhaustive { sizes[c] } else { sizes[c].min(share) };
        remaining -= quotas[c];
    }

    let v = &s.values;
    let results: Vec<(PairMax, usize)> = classes
        .par_iter()
        .enumerate()
        .map(|(c, class)| {
            let mut best = PairMax::none();
            if quotas[c] >= sizes[c] {
                for o in class {
                    let sp = o.separation.powf(rho);
                    for b in 0..o.bases {
                        let (i, j) = pair_at(s, o, b);
                        best = best.better(PairMax { value: ratio(v, i, j, sp), a: i, b: j });
                    }
                }
                return (best, sizes[c]);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let cum: Vec<usize> = class
                .iter()
                .scan(0usize, |acc, o| {
                    *acc += o.bases;
                    Some(*acc)
                })
                .collect();
            let draw = |rng: &mut ChaCha8Rng, n: usize| ((rng.next_u64() as u128 * n as u128) >> 64) as usize;
            for _ in 0..quotas[c] {
                let r = draw(&mut rng, sizes[c]);
                let oi = cum.partition_point(|&x| x <= r);
                let o = class[oi];
                let start = if oi == 0 { 0 } else { cum[oi - 1] };
                let (i, j) = pair_at(s, o, r - start);
                best = best.better(PairMax { value: ratio(v, i, j, o.separation.powf(rho)), a: i, b: j });
            }
            (best, quotas[c])
        })
        .collect();
    let mut used: usize = results.iter().map(|r| r.1).sum();
    let mut best = PairMax::none();
    if exhaustive {
        best = results.into_iter().fold(best, |m, r| m.better(r.0));
    } else {
        // polish each class winner by coordinate ascent over neighbouring samples
        let limit = offs.iter().map(|o| o.separation).fold(0.0, f64::max);
        for (start, _) in results {
            if start.a == usize::MAX {
                continue;
            }
            let (b, n) = climb(s, start, rho, limit);
            used += n;
            best = best.better(b);
        }
    }
    (best, used, exhaustive)
}

fn separation(s: &SpaceTimeSamples, a: usize, b: usize) -> f64 {
    let (ta, xa) = s.coordinates(a);
    let (tb, xb) = s.coordinates(b);
    let dx = ((xa[0] - xb[0]).powi(2) + (xa[1] - xb[1]).powi(2) + (xa[2] - xb[2]).powi(2)).sqrt();
    (ta - tb).abs() + dx
}

/// Moves either endpoint one lattice step while the ratio improves.
fn climb(s: &SpaceTimeSamples, start: PairMax, rho: f64, limit: f64) -> (PairMax, usize) {
    let [nx, ny, nz] = s.shape;
    let nt = s.times.len();
    let dims = [nt, nx, ny, nz];
    let split = |idx: usize| {
        let k = idx % nz;
        let j = (idx / nz) % ny;
        let i = (idx / (nz * ny)) % nx;
        [idx / (nz * ny * nx), i, j, k]
    };
    let join = |c: [usize; 4]| s.index(c[0], [c[1], c[2], c[3]]);
    let mut cur = start;
    let mut evals = 0;
    loop {
        let mut next = cur;
        for end in 0..2 {
            let fixed = if end == 0 { cur.b } else { cur.a };
            let moving = split(if end == 0 { cur.a } else { cur.b });
            for axis in 0..4 {
                for step in [-1i64, 1] {
                    let v = moving[axis] as i64 + step;
                    if v < 0 || v >= dims[axis] as i64 {
                        continue;
                    }
                    let mut c = moving;
                    c[axis] = v as usize;
                    let m = join(c);
                    if m == fixed {
                        continue;
                    }
                    let sep = separation(s, m, fixed);
                    if sep > limit {
                        continue;
                    }
                    evals += 1;
                    let (a, b) = if m < fixed { (m, fixed) } else { (fixed, m) };
                    next = next.better(PairMax { value: ratio(&s.values, a, b, sep.powf(rho)), a, b });
                }
            }
        }
        if next.value <= cur.value {
            return (cur, evals);
        }
        cur = next;
    }
}

/// Grid Hölder norm: sample sup plus the sample seminorm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub norm: f64,
    pub sup: f64,
    pub seminorm: f64,
    /// Maximizing pair as flat sample indices; `None` for a single sample.
    pub argmax: Option<(usize, usize)>,
    pub pairs: usize,
    pub exhaustive: bool,
}

pub fn holder_norm(g: &SpaceTimeSamples, rho: f64) -> Result<HolderEstimate> {
    holder_norm_with(g, rho, DEFAULT_PAIR_BUDGET, 0)
}

/// `sup|g| + sup |g(a) − g(b)| / (|Δt| + |Δx|)^ρ` over sample points.
///
/// Above `budget` pairs the seminorm is estimated from a deterministic
/// subsample keyed on `seed`.
pub fn holder_norm_with(g: &SpaceTimeSamples, rho: f64, budget: usize, seed: u64) -> Result<HolderEstimate> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::domain(format!("Hölder exponent must lie in (0, 1), got {rho}")));
    }
    if g.is_empty() {
        return Err(Error::domain("empty space-time window"));
    }
    let sup = g.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (best, pairs, exhaustive) = stratified_max(g, &offsets(g), rho, budget, seed);
    Ok(HolderEstimate {
        norm: sup + best.value,
        sup,
        seminorm: best.value,
        argmax: (best.a != usize::MAX).then_some((best.a, best.b)),
        pairs,
        exhaustive,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub value: f64,
    /// Set when no sample pair was closer than `δ`; the value is then 0.
    pub no_pairs: bool,
}

/// `O_g(δ)`: sup of `|Δg| / sep^{ρ′}` over sample pairs with `sep < δ`.
pub fn holder_modulus(g: &SpaceTimeSamples, rho_prime: f64, delta: f64) -> Result<ModulusEstimate> {
    if !(rho_prime > 0.0 && rho_prime < 1.0) {
        return Err(Error::domain(format!("exponent must lie in (0, 1), got {rho_prime}")));
    }
    if !(delta > 0.0) {
        return Err(Error::domain(format!("delta must be positive, got {delta}")));
    }
    let offs: Vec<Offset> = offsets(g).into_iter().filter(|o| o.separation < delta).collect();
    if offs.is_empty() {
        log::warn!("no sample pairs closer than {delta}; modulus set to 0");
        return Ok(ModulusEstimate { value: 0.0, no_pairs: true });
    }
    let (best, _, _) = stratified_max(g, &offs, rho_prime, DEFAULT_PAIR_BUDGET, 0);
    debug_assert!(best.a == usize::MAX || separation(g, best.a, best.b) < delta);
    Ok(ModulusEstimate { value: best.value, no_pairs: false })
}
