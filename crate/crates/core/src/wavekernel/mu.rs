use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::cell_self_interaction;
use crate::quadrature::{pairwise_sum, GaussLegendre};

/// Which kernel integral: `g = f(y-x+v-u)`, `|Df(v-u, x-y)|` or `|D²f(v-u, x-y)|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MuKind {
    One,
    Two,
    Four,
}

impl MuKind {
    pub fn from_index(which: u8) -> Result<Self> {
        match which {
            1 => Ok(MuKind::One),
            2 => Ok(MuKind::Two),
            4 => Ok(MuKind::Four),
            _ => Err(Error::domain(format!("kernel integral index must be 1, 2 or 4, got {which}"))),
        }
    }

    pub fn index(&self) -> u8 {
        match self {
            MuKind::One => 1,
            MuKind::Two => 2,
            MuKind::Four => 4,
        }
    }
}

/// Orders of the three nested rules: outer sphere polar angle, inner sphere
/// polar angle (the inner azimuth uses twice as many points), and the time
/// variable on each piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuQuad {
    pub outer: usize,
    pub inner: usize,
    pub radial: usize,
}

impl Default for MuQuad {
    fn default() -> Self {
        MuQuad { outer: 12, inner: 16, radial: 12 }
    }
}

impl MuQuad {
    pub fn doubled(&self) -> Self {
        MuQuad { outer: 2 * self.outer, inner: 2 * self.inner, radial: 2 * self.radial }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuValue {
    pub value: f64,
    /// Relative change between the base and the doubled resolution.
    pub refinement_error: f64,
}

/// One CSV record of a kernel-integral table.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MuRow {
    pub which: u8,
    pub t: f64,
    pub distance: f64,
    pub beta: f64,
    pub alpha: f64,
    pub value: f64,
    pub refinement_error: f64,
}

const REFINEMENT_TOL: f64 = 0.01;

/// `∫₀ᵗ ds ∬ G(s,du) G(s,dv) g(u,v)` at the given resolution, then at double
/// resolution; fails if the two differ by more than 1%.
#[allow(clippy::too_many_arguments)]
pub fn mu_integral(
    which: MuKind,
    t: f64,
    x: [f64; 3],
    y: [f64; 3],
    beta: f64,
    alpha: f64,
    quad: MuQuad,
) -> Result<MuValue> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(Error::domain(format!("beta must lie in (0, 2), got {beta}")));
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    let upper = match which {
        MuKind::One => f64::INFINITY,
        MuKind::Two => (2.0 - beta).min(1.0),
        MuKind::Four => 2.0 - beta,
    };
    if which != MuKind::One && !(alpha > 0.0 && alpha < upper) {
        return Err(Error::domain(format!(
            "alpha must lie in (0, {upper}) for mu{}, got {alpha}",
            which.index()
        )));
    }
    let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
    let coarse = mu_integral_once(which, t, d, beta, quad);
    let fine = mu_integral_once(which, t, d, beta, quad.doubled());
    let rel = if fine != 0.0 { ((fine - coarse) / fine).abs() } else { coarse.abs() };
    if rel > REFINEMENT_TOL || !fine.is_finite() {
        return Err(Error::Accuracy {
            what: format!("mu{} at t={t}, |x-y|={d}, beta={beta}", which.index()),
            rel_diff: rel,
            tol: REFINEMENT_TOL,
        });
    }
    Ok(MuValue { value: fine, refinement_error: rel })
}

/// Single-resolution evaluation at separation `d` (direction is irrelevant).
pub fn mu_integral_once(which: MuKind, t: f64, d: f64, beta: f64, quad: MuQuad) -> f64 {
    // the off-pole singularity reaches the sphere pair once 2s ≥ d
    let b = 0.5 * d;
    let mut nodes = Vec::new();
    if b > 0.0 && b < t {
        nodes.extend(graded(0.0, b, Some(2.0), Some(2.0), quad.radial));
        nodes.extend(graded(b, t, Some(2.0), None, quad.radial));
    } else {
        nodes.extend(graded(0.0, t, Some(2.0), None, quad.radial));
    }
    let unit_self = cell_self_interaction(1.0, beta);
    let vals: Vec<f64> = nodes
        .par_iter()
        .map(|&(s, w)| w * s * s * sphere_pair_mean(which, s, d, beta, unit_self, quad))
        .collect();
    pairwise_sum(&vals)
}

/// Gauss–Legendre on `[a, b]` after a grading map that clusters nodes at
/// the flagged ends: `x = a + (b-a)τ^p` for one end, a sigmoidal map
/// `τ^p/(τ^p + (1-τ)^p)` for both.
fn graded(a: f64, b: f64, left: Option<f64>, right: Option<f64>, order: usize) -> Vec<(f64, f64)> {
    let g = GaussLegendre::get(order);
    let len = b - a;
    g.on(0.0, 1.0)
        .map(|(tau, wt)| {
            let (x, dx) = match (left, right) {
                (None, None) => (a + len * tau, len),
                (Some(p), None) => (a + len * tau.powf(p), len * p * tau.powf(p - 1.0)),
                (None, Some(p)) => (b - len * (1.0 - tau).powf(p), len * p * (1.0 - tau).powf(p - 1.0)),
                (Some(p), Some(q)) => {
                    let p = p.max(q);
                    let u = tau.powf(p);
                    let v = (1.0 - tau).powf(p);
                    let den = u + v;
                    let dd = p * tau.powf(p - 1.0) * (1.0 - tau).powf(p - 1.0) / (den * den);
                    (a + len * u / den, len * dd)
                }
            };
            (x, wt * dx)
        })
        .collect()
}

/// Composite graded rule on `[a, b]` split at interior singular points.
fn split_rule(a: f64, b: f64, points: &[f64], ends: (Option<f64>, Option<f64>), p: f64, order: usize) -> Vec<(f64, f64)> {
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = points.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    inner.dedup();
    cuts.extend(inner);
    cuts.push(b);
    let last = cuts.len() - 2;
    let mut out = Vec::new();
    for (i, w) in cuts.windows(2).enumerate() {
        let l = if i == 0 { ends.0 } else { Some(p) };
        let r = if i == last { ends.1 } else { Some(p) };
        out.extend(graded(w[0], w[1], l, r, order));
    }
    out
}

/// `E g(s(V-U))` for `U, V` independent uniform on the unit sphere.
///
/// The separation vector lies on the z axis, so the outer longitude is
/// integrated exactly and the inner azimuth is folded onto `[0, π]`. The
/// inner sphere is parametrised by `ε = 1 - U·V` about `U`. Every rule is
/// graded toward the coincidence `V = U` and toward the points where
/// `w = s(V-U)` hits `±d`, which sit at `U_z = ±d/2s`, `ε = d²/2s²` and
/// azimuth `0` or `π`.
fn sphere_pair_mean(which: MuKind, s: f64, d: f64, beta: f64, unit_self: f64, quad: MuQuad) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    const P: f64 = 3.0;
    let m = (4.0 / (2.0 - beta)).ceil();
    let hb = -0.5 * beta;
    let ratio = d / (2.0 * s);
    let (plus, minus) = match which {
        MuKind::One => (false, d > 0.0),
        MuKind::Two => (true, false),
        MuKind::Four => (true, true),
    };
    let mut outer_pts = Vec::new();
    if plus {
        outer_pts.push(ratio);
    }
    if minus {
        outer_pts.push(-ratio);
    }
    let outer = split_rule(-1.0, 1.0, &outer_pts, (None, None), P, quad.outer);
    let eps_star = 2.0 * ratio * ratio;
    let eps_rule: Vec<(f64, f64)> = if d > 0.0 && eps_star < 2.0 {
        let mut v = graded(0.0, eps_star, Some(m), Some(P), quad.inner);
        v.extend(graded(eps_star, 2.0, Some(P), None, quad.inner));
        v
    } else {
        graded(0.0, 2.0, Some(m), None, quad.inner)
    };
    let az: Vec<(f64, f64, f64)> = graded(0.0, std::f64::consts::PI, Some(P), Some(P), quad.inner)
        .into_iter()
        .map(|(a, w)| (a.cos(), a.sin(), w / std::f64::consts::PI))
        .collect();
    // never active at the quadrature nodes in practice; guards exact hits
    let ell = s * std::f64::consts::PI / (quad.inner as f64).powi(3);
    let cap = unit_self * ell.powf(-beta);
    let f = |z: [f64; 3]| -> f64 {
        let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
        if r2 == 0.0 {
            cap
        } else {
            r2.powf(hb).min(cap)
        }
    };
    let mut acc = 0.0;
    for &(cu, wu) in &outer {
        let su = (1.0 - cu * cu).max(0.0).sqrt();
        let mut inner = 0.0;
        for &(eps, we) in &eps_rule {
            let sc = (eps * (2.0 - eps)).max(0.0).sqrt();
            // |w|² = 2 s² ε; the grading absorbs this singularity, no cap
            let f_w = (2.0 * s * s * eps).powf(hb);
            let mut ring = 0.0;
            for &(ca, sa, wa) in &az {
                // w = s(V - U), V = cU + sc(cos a e1 + sin a e2),
                // U = (su, 0, cu), e1 = (cu, 0, -su), e2 = (0, 1, 0)
                let w = [
                    s * (-eps * su + sc * ca * cu),
                    s * sc * sa,
                    s * (-eps * cu - sc * ca * su),
                ];
                let g = match which {
                    MuKind::One => {
                        if d == 0.0 {
                            f_w
                        } else {
                            f([w[0], w[1], w[2] - d])
                        }
                    }
                    MuKind::Two => (f([w[0], w[1], w[2] + d]) - f_w).abs(),
                    MuKind::Four => (f([w[0], w[1], w[2] - d]) - 2.0 * f_w + f([w[0], w[1], w[2] + d])).abs(),
                };
                ring += wa * g;
            }
            inner += 0.5 * we * ring;
        }
        acc += 0.5 * wu * inner;
    }
    acc
}

/// `2^{1-β} t^{3-β} / ((2-β)(3-β))`, the diagonal value of `μ₁`.
pub fn mu1_diagonal_closed_form(t: f64, beta: f64) -> f64 {
    2f64.powf(1.0 - beta) * t.powf(3.0 - beta) / ((2.0 - beta) * (3.0 - beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    const O: [f64; 3] = [0.0; 3];

    #[test]
    fn mu1_diagonal_matches_closed_form() {
        for beta in [0.5, 1.0, 1.5] {
            for t in [0.25, 0.5, 1.0] {
                let v = mu_integral(MuKind::One, t, O, O, beta, 0.0, MuQuad::default()).unwrap();
                let want = mu1_diagonal_closed_form(t, beta);
                assert!((v.value - want).abs() / want < 1e-3, "beta={beta} t={t}: {} {want}", v.value);
            }
        }
        // β = 1 reduces to t²/2
        assert!((mu1_diagonal_closed_form(0.8, 1.0) - 0.32).abs() < 1e-15);
    }

    #[test]
    fn mu1_vanishes_as_t_shrinks() {
        let a = mu_integral(MuKind::One, 1e-3, O, O, 1.0, 0.0, MuQuad::default()).unwrap().value;
        assert!(a < 1e-6);
    }

    #[test]
    fn alpha_range_enforced() {
        let q = MuQuad::default();
        assert!(mu_integral(MuKind::Two, 1.0, O, [0.1, 0.0, 0.0], 1.5, 0.6, q).is_err());
        assert!(mu_integral(MuKind::Four, 1.0, O, [0.1, 0.0, 0.0], 1.0, 1.0, q).is_err());
        assert!(mu_integral(MuKind::One, -1.0, O, O, 1.0, 0.0, q).is_err());
    }

    // Reference values at t = 1 from a reduced 2D quadrature using the chord
    // density of the difference of two uniform sphere points.
    const D: [f64; 6] = [0.05, 0.07578582832551990, 0.1148698354997035, 0.1741101126592248, 0.2639015821545788, 0.4];
    const MU2_B1: [f64; 6] = [0.04868158260913897, 0.06603000876465188, 0.08842012129581656, 0.11656189811181425, 0.1507174112453095, 0.1902585068829531];
    const MU4_B1: [f64; 6] = [0.04327616615617649, 0.06411252715881972, 0.09413120792151254, 0.13650521254091308, 0.19461991831547318, 0.2711125721865063];

    #[test]
    fn mu2_mu4_match_reduced_reference() {
        let q = MuQuad::default();
        for i in [0usize, 3, 5] {
            let y = [D[i], 0.0, 0.0];
            let v2 = mu_integral(MuKind::Two, 1.0, O, y, 1.0, 0.4, q).unwrap().value;
            let v4 = mu_integral(MuKind::Four, 1.0, O, y, 1.0, 0.5, q).unwrap().value;
            assert!((v2 - MU2_B1[i]).abs() / MU2_B1[i] < 0.02, "mu2 d={}: {v2} vs {}", D[i], MU2_B1[i]);
            assert!((v4 - MU4_B1[i]).abs() / MU4_B1[i] < 0.02, "mu4 d={}: {v4} vs {}", D[i], MU4_B1[i]);
        }
    }
}
