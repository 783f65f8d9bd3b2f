use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::Fft3;
use crate::noise::{dyadic_floor_steps, first_violation, max_interval_index, BrownianFamily, SmoothedNoise};
use crate::wavekernel::PropagatorTables;

use super::config::SimConfig;
use super::path::{PathSolution, SnapshotBox};

/// Fields are declared divergent past this max-norm.
pub const DIVERGENCE_CAP: f64 = 1e12;

/// What drives the `B` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BDrive {
    Brownian,
    Smoothed,
    Off,
}

/// One equation advanced by [`run_lanes`]. Every lane starts from the
/// initial data of the config and sees the same drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneSpec {
    /// `A(u)` against the Brownian increments.
    pub a_noise: bool,
    pub b_drive: BDrive,
    /// `D(u)` against the control.
    pub control: bool,
    pub drift: bool,
    /// Evaluate the coefficients on an earlier lane instead of on this one.
    pub coeff_source: Option<usize>,
    /// Multiply every source term by `1_{K(s)}`.
    pub mask_sources: bool,
    /// Also record, for every snapshot time `t`, the free continuation to
    /// `t` of the state at `tₙ(t)`.
    pub minus: bool,
    /// Level `n` for the smoothed term, the truncation and the localization
    /// flags; `None` uses the config level.
    pub level: Option<u32>,
}

impl LaneSpec {
    /// The full equation for `X`.
    pub fn full() -> Self {
        LaneSpec { a_noise: true, b_drive: BDrive::Brownian, control: true, drift: true, coeff_source: None, mask_sources: false, minus: false, level: None }
    }

    /// `Xₙ`: the `B` term sees the smoothed noise.
    pub fn regularized() -> Self {
        LaneSpec { b_drive: BDrive::Smoothed, ..LaneSpec::full() }
    }

    /// No randomness: control and drift only.
    pub fn skeleton() -> Self {
        LaneSpec { a_noise: false, b_drive: BDrive::Off, ..LaneSpec::full() }
    }

    /// Homogeneous wave equation.
    pub fn free() -> Self {
        LaneSpec { a_noise: false, b_drive: BDrive::Off, control: false, drift: false, ..LaneSpec::full() }
    }

    pub fn with_minus(mut self) -> Self {
        self.minus = true;
        self
    }

    pub fn at_level(mut self, n: u32) -> Self {
        self.level = Some(n);
        self
    }
}

#[derive(Debug, Clone)]
pub struct LaneOutput {
    pub path: PathSolution,
    pub minus: Option<PathSolution>,
    /// Brownian increments consumed by the `A` term, and their sum.
    pub a_draws: u64,
    pub a_checksum: f64,
}

struct Active {
    kick_a: bool,
    kick_b: bool,
    smooth_b: bool,
    control: bool,
    drift: bool,
}

impl Active {
    fn kick(&self) -> bool {
        self.kick_a || self.kick_b
    }

    fn constant(&self) -> bool {
        self.smooth_b || self.control || self.drift
    }

    fn forced(&self) -> bool {
        self.kick() || self.constant()
    }
}

struct LaneState {
    u: Vec<Complex64>,
    v: Vec<Complex64>,
    phys: Vec<f64>,
    kick: Vec<f64>,
    cons: Vec<f64>,
    kick_hat: Vec<Complex64>,
    cons_hat: Vec<Complex64>,
    captures: BTreeMap<usize, (Vec<Complex64>, Vec<Complex64>)>,
    snaps: Vec<f64>,
    a_draws: u64,
    a_checksum: f64,
}

fn fill_combination(out: &mut [f64], patterns: &[Vec<f64>], coeffs: impl Iterator<Item = f64>) {
    out.fill(0.0);
    for (p, c) in patterns.iter().zip(coeffs) {
        if c != 0.0 {
            for (o, &x) in out.iter_mut().zip(p) {
                *o += c * x;
            }
        }
    }
}

fn two_mut<T>(v: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    assert!(a < b);
    let (lo, hi) = v.split_at_mut(b);
    (&mut lo[a], &mut hi[0])
}

#[derive(Clone, Copy)]
enum Slot {
    Kick(usize),
    Cons(usize),
}

/// Advances several coupled equations over one Brownian family.
///
/// Each step of length `δ` evaluates coefficients at the left point, kicks
/// the velocity by the Brownian terms, and then propagates exactly with the
/// smoothed-noise, control and drift terms held constant over the step.
/// With `fam = None` the Brownian drivers vanish. Smoothed noises missing
/// from `smoothers` are built from `fam`.
///
/// Real fields are transformed two at a time, so results of a lane can
/// differ from a single-lane run at rounding level.
pub fn run_lanes(
    cfg: &SimConfig,
    fam: Option<&BrownianFamily>,
    smoothers: &[&SmoothedNoise],
    lanes: &[LaneSpec],
) -> Result<Vec<LaneOutput>> {
    cfg.validate()?;
    if let Some(f) = fam {
        cfg.check_family(f)?;
    }
    let q = cfg.fine_level;
    let levels: Vec<u32> = lanes.iter().map(|s| s.level.unwrap_or(cfg.level)).collect();
    for (l, spec) in lanes.iter().enumerate() {
        if spec.coeff_source.is_some_and(|s| s >= l) {
            return Err(Error::config(format!("lane {l} may only read coefficients from an earlier lane")));
        }
        if levels[l] + 3 > q {
            return Err(Error::config(format!("lane {l}: fine level q = {q} must be at least n + 3 = {}", levels[l] + 3)));
        }
    }

    let grid = cfg.grid;
    let len = grid.len();
    let steps = cfg.steps();
    let delta = cfg.delta();
    let co = cfg.coefficients;
    let tables = PropagatorTables::new(&grid, delta)?;
    let mut fft = Fft3::new(&grid);
    let region = SnapshotBox::padded(&grid, &cfg.window, cfg.horizon);
    let modes = cfg.mode_count();

    // smoothed noises by level
    let mut smooth: BTreeMap<u32, Cow<'_, SmoothedNoise>> = BTreeMap::new();
    for (l, spec) in lanes.iter().enumerate() {
        if spec.b_drive != BDrive::Smoothed || smooth.contains_key(&levels[l]) {
            continue;
        }
        if let Some(s) = smoothers.iter().find(|s| s.level() == levels[l]) {
            if s.fine_level() != q || s.horizon() != cfg.horizon {
                return Err(Error::config("smoothed noise does not match the fine grid"));
            }
            smooth.insert(levels[l], Cow::Borrowed(*s));
        } else if let Some(f) = fam {
            smooth.insert(levels[l], Cow::Owned(SmoothedNoise::new(f, levels[l])?));
        }
    }

    let active: Vec<Active> = lanes
        .iter()
        .enumerate()
        .map(|(l, s)| Active {
            kick_a: s.a_noise && fam.is_some() && !co.a.is_zero(),
            kick_b: s.b_drive == BDrive::Brownian && fam.is_some() && !co.b.is_zero(),
            smooth_b: s.b_drive == BDrive::Smoothed
                && !co.b.is_zero()
                && smooth.get(&levels[l]).is_some_and(|n| n.active_modes() > 0),
            control: s.control && !co.d.is_zero() && !cfg.control.is_zero(),
            drift: s.drift && !co.drift.is_zero(),
        })
        .collect();

    // which lanes need a physical field at every step
    let mut need_phys = vec![false; lanes.len()];
    for (l, s) in lanes.iter().enumerate() {
        if active[l].forced() {
            need_phys[s.coeff_source.unwrap_or(l)] = true;
        }
    }
    let any_brownian = active.iter().any(|a| a.kick());
    let any_control = active.iter().any(|a| a.control);
    let any_mask = lanes.iter().zip(&active).any(|(s, a)| s.mask_sources && a.forced());

    let patterns = cfg.modes.forcing_patterns(&cfg.weights);
    let dist: Vec<f64> = if any_mask {
        (0..len).map(|i| cfg.window.torus_distance(&grid, grid.point(i))).collect()
    } else {
        Vec::new()
    };

    let snap_set: BTreeSet<usize> = cfg.snapshot_steps.iter().copied().collect();
    let capture_steps: Vec<BTreeSet<usize>> = lanes
        .iter()
        .enumerate()
        .map(|(l, spec)| {
            if spec.minus {
                cfg.snapshot_steps.iter().map(|&s| dyadic_floor_steps(s, levels[l], q).1).collect()
            } else {
                BTreeSet::new()
            }
        })
        .collect();

    let u0 = cfg.initial.v0.spectrum().to_vec();
    let v0 = cfg.initial.v0_dot.spectrum().to_vec();
    let spectral = |on: bool| if on { vec![Complex64::default(); len] } else { Vec::new() };
    let real = |on: bool| if on { vec![0.0; len] } else { Vec::new() };
    let mut states: Vec<LaneState> = lanes
        .iter()
        .enumerate()
        .map(|(l, _)| LaneState {
            u: u0.clone(),
            v: v0.clone(),
            phys: vec![0.0; len],
            kick: real(active[l].kick()),
            cons: real(active[l].constant()),
            kick_hat: spectral(active[l].kick()),
            cons_hat: spectral(active[l].constant()),
            captures: BTreeMap::new(),
            snaps: Vec::with_capacity(cfg.snapshot_steps.len() * region.count()),
            a_draws: 0,
            a_checksum: 0.0,
        })
        .collect();

    let mut fw = vec![0.0; len];
    let mut fh = vec![0.0; len];
    let mut mask = vec![1.0; len];
    // smoothed fields by level, refreshed when the coarse interval changes
    let mut fsm: BTreeMap<u32, (usize, Vec<f64>)> = smooth.keys().map(|&n| (n, (usize::MAX, vec![0.0; len]))).collect();
    let slots: Vec<Slot> = (0..lanes.len())
        .flat_map(|l| {
            let a = &active[l];
            let k = a.kick().then_some(Slot::Kick(l));
            let c = a.constant().then_some(Slot::Cons(l));
            k.into_iter().chain(c)
        })
        .collect();

    for s in 0..=steps {
        let snap = snap_set.contains(&s);
        let todo: Vec<usize> = (0..lanes.len()).filter(|&l| snap || (s < steps && need_phys[l])).collect();
        for pair in todo.chunks(2) {
            match *pair {
                [a, b] => {
                    let (x, y) = two_mut(&mut states, a, b);
                    fft.inverse_pair(&x.u, &y.u, &mut x.phys, &mut y.phys);
                }
                [a] => {
                    let x = &mut states[a];
                    fft.inverse_real_into(&x.u, &mut x.phys);
                }
                _ => unreachable!(),
            }
        }
        for &l in &todo {
            let m = states[l].phys.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
            if !(m <= DIVERGENCE_CAP) {
                return Err(Error::Divergence { step: s, detail: format!("lane {l}: max |u| = {m:e}") });
            }
        }
        if snap {
            for st in states.iter_mut() {
                let ext = region.extract(&grid, &st.phys);
                st.snaps.extend(ext);
            }
        }
        for (l, st) in states.iter_mut().enumerate() {
            if capture_steps[l].contains(&s) {
                st.captures.insert(s, (st.u.clone(), st.v.clone()));
            }
        }
        if s == steps {
            break;
        }

        if any_brownian {
            let f = fam.expect("Brownian lanes require a family");
            fill_combination(&mut fw, &patterns, (1..=modes).map(|j| f.increment(j, s)));
        }
        for (n, (cur, field)) in fsm.iter_mut() {
            let sn = &smooth[n];
            let i = sn.interval_of_step(s);
            if i != *cur {
                let k = sn.active_modes();
                fill_combination(field, &patterns[..k], (1..=k).map(|j| sn.rate(j, i)));
                *cur = i;
            }
        }
        if any_control {
            let c = &cfg.control;
            fill_combination(&mut fh, &patterns[..c.modes()], (1..=c.modes()).map(|j| c.coeff(j, s)));
        }
        if any_mask {
            let r = cfg.horizon - cfg.time_of(s) + 1e-9 * grid.spacing();
            for (m, &d) in mask.iter_mut().zip(&dist) {
                *m = if d <= r { 1.0 } else { 0.0 };
            }
        }

        // source fields
        for l in 0..lanes.len() {
            let spec = &lanes[l];
            let act = &active[l];
            if spec.a_noise {
                if let Some(f) = fam {
                    states[l].a_draws += modes as u64;
                    states[l].a_checksum += (1..=modes).map(|j| f.increment(j, s)).sum::<f64>();
                }
            }
            if !act.forced() {
                continue;
            }
            let src_lane = spec.coeff_source.unwrap_or(l);
            let masked = spec.mask_sources;
            let smoothed = act.smooth_b.then(|| &fsm[&levels[l]].1);
            // the source lane is never later than l, so split there
            let (before, rest) = states.split_at_mut(l);
            let me = &mut rest[0];
            let src: &[f64] = if src_lane == l { &me.phys } else { &before[src_lane].phys };
            if act.kick() {
                for x in 0..len {
                    let u = src[x];
                    let mut k = 0.0;
                    if act.kick_a {
                        k += co.a.eval(u);
                    }
                    if act.kick_b {
                        k += co.b.eval(u);
                    }
                    k *= fw[x];
                    me.kick[x] = if masked { k * mask[x] } else { k };
                }
            }
            if act.constant() {
                for x in 0..len {
                    let u = src[x];
                    let mut c = 0.0;
                    if let Some(f) = smoothed {
                        c += co.b.eval(u) * f[x];
                    }
                    if act.control {
                        c += co.d.eval(u) * fh[x];
                    }
                    if act.drift {
                        c += co.drift.eval(u);
                    }
                    me.cons[x] = if masked { c * mask[x] } else { c };
                }
            }
        }

        // forward transforms, two real fields at a time
        for pair in slots.chunks(2) {
            match *pair {
                [a, b] => {
                    let (la, lb) = (slot_lane(a), slot_lane(b));
                    if la == lb {
                        let x = &mut states[la];
                        fft.forward_pair(&x.kick, &x.cons, &mut x.kick_hat, &mut x.cons_hat);
                    } else {
                        let (x, y) = two_mut(&mut states, la, lb);
                        let (ar, ah) = slot_buffers(x, a);
                        let (br, bh) = slot_buffers(y, b);
                        fft.forward_pair(ar, br, ah, bh);
                    }
                }
                [a] => {
                    let x = &mut states[slot_lane(a)];
                    let (r, h) = slot_buffers(x, a);
                    fft.forward_real_into(r, h);
                }
                _ => unreachable!(),
            }
        }

        for (l, st) in states.iter_mut().enumerate() {
            let act = &active[l];
            if act.kick() {
                for (v, k) in st.v.iter_mut().zip(&st.kick_hat) {
                    *v += k;
                }
            }
            if act.constant() {
                tables.apply_forced(&mut st.u, &mut st.v, &st.cons_hat);
            } else {
                tables.apply(&mut st.u, &mut st.v);
            }
        }
    }

    let times: Vec<f64> = cfg.snapshot_steps.iter().map(|&s| cfg.time_of(s)).collect();
    let mut violations: BTreeMap<u32, Option<usize>> = BTreeMap::new();
    let mut out = Vec::with_capacity(lanes.len());
    let mut gap_tables: BTreeMap<usize, PropagatorTables> = BTreeMap::new();
    let mut buf_u = vec![Complex64::default(); len];
    let mut buf_v = vec![Complex64::default(); len];
    let mut field = vec![0.0; len];
    for (l, st) in states.into_iter().enumerate() {
        let n = levels[l];
        let localized: Vec<bool> = match fam {
            Some(f) => {
                let v = match violations.get(&n) {
                    Some(v) => *v,
                    None => {
                        let v = first_violation(f, n, cfg.alpha)?;
                        violations.insert(n, v);
                        v
                    }
                };
                times.iter().map(|&t| v.is_none_or(|i| i > max_interval_index(n, t, cfg.horizon))).collect()
            }
            None => vec![true; times.len()],
        };
        let base = PathSolution {
            grid,
            horizon: cfg.horizon,
            fine_level: q,
            steps: cfg.snapshot_steps.clone(),
            times: times.clone(),
            region,
            values: Vec::new(),
            localized,
            seed: fam.map(|f| *f.record()),
            config_hash: None,
        };
        let minus = if lanes[l].minus {
            let mut values = Vec::with_capacity(st.snaps.len());
            for &s in &cfg.snapshot_steps {
                let tn = dyadic_floor_steps(s, n, q).1;
                let (u, v) = &st.captures[&tn];
                let gap = s - tn;
                if !gap_tables.contains_key(&gap) {
                    gap_tables.insert(gap, PropagatorTables::new(&grid, gap as f64 * delta)?);
                }
                buf_u.copy_from_slice(u);
                buf_v.copy_from_slice(v);
                gap_tables[&gap].apply(&mut buf_u, &mut buf_v);
                fft.inverse_real_into(&buf_u, &mut field);
                values.extend(region.extract(&grid, &field));
            }
            Some(PathSolution { values, ..base.clone() })
        } else {
            None
        };
        out.push(LaneOutput {
            path: PathSolution { values: st.snaps, ..base },
            minus,
            a_draws: st.a_draws,
            a_checksum: st.a_checksum,
        });
    }
    Ok(out)
}

fn slot_lane(s: Slot) -> usize {
    match s {
        Slot::Kick(l) | Slot::Cons(l) => l,
    }
}

fn slot_buffers(st: &mut LaneState, s: Slot) -> (&[f64], &mut [Complex64]) {
    match s {
        Slot::Kick(_) => (&st.kick, &mut st.kick_hat),
        Slot::Cons(_) => (&st.cons, &mut st.cons_hat),
    }
}
