use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Field, TorusGrid};

/// Position/velocity pair at time `t`.
#[derive(Debug, Clone)]
pub struct WaveState {
    pub u: Field,
    pub v: Field,
    pub t: f64,
}

impl WaveState {
    pub fn new(u: Field, v: Field, t: f64) -> Result<Self> {
        u.check_same_grid(&v)?;
        Ok(WaveState { u, v, t })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        WaveState { u: Field::zeros(grid), v: Field::zeros(grid), t: 0.0 }
    }
}

/// Per-frequency coefficients of the exact step of length `delta` for
/// `ü = -ω² u + F`, with `F` held constant over the step.
#[derive(Debug, Clone)]
pub struct PropagatorTables {
    pub delta: f64,
    /// `cos(ωδ)`
    pub cos: Vec<f64>,
    /// `sin(ωδ)/ω`, with limit `δ`
    pub sinc: Vec<f64>,
    /// `ω sin(ωδ)`
    pub wsin: Vec<f64>,
    /// `(1 - cos(ωδ))/ω²`, with limit `δ²/2`
    pub versine: Vec<f64>,
}

impl PropagatorTables {
    pub fn new(grid: &TorusGrid, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::domain(format!("propagation step must be >= 0, got {delta}")));
        }
        let n = grid.len();
        let mut t = PropagatorTables {
            delta,
            cos: Vec::with_capacity(n),
            sinc: Vec::with_capacity(n),
            wsin: Vec::with_capacity(n),
            versine: Vec::with_capacity(n),
        };
        for idx in 0..n {
            let w = grid.omega(idx);
            let x = w * delta;
            let (s, c) = x.sin_cos();
            t.cos.push(c);
            t.wsin.push(w * s);
            if x < 1e-4 {
                // series keeps the small-ω entries exact to rounding
                let x2 = x * x;
                t.sinc.push(delta * (1.0 - x2 / 6.0 + x2 * x2 / 120.0));
                t.versine.push(delta * delta * (0.5 - x2 / 24.0 + x2 * x2 / 720.0));
            } else {
                t.sinc.push(s / w);
                // 1 - cos x = 2 sin²(x/2) avoids cancellation
                let h = (0.5 * x).sin();
                t.versine.push(2.0 * h * h / (w * w));
            }
        }
        Ok(t)
    }

    /// Free step in place.
    #[inline]
    pub fn apply(&self, u: &mut [Complex64], v: &mut [Complex64]) {
        for k in 0..u.len() {
            let (a, b) = (u[k], v[k]);
            u[k] = a * self.cos[k] + b * self.sinc[k];
            v[k] = b * self.cos[k] - a * self.wsin[k];
        }
    }

    /// Step with constant forcing `f` over the interval.
    #[inline]
    pub fn apply_forced(&self, u: &mut [Complex64], v: &mut [Complex64], f: &[Complex64]) {
        for k in 0..u.len() {
            let (a, b, c) = (u[k], v[k], f[k]);
            u[k] = a * self.cos[k] + b * self.sinc[k] + c * self.versine[k];
            v[k] = b * self.cos[k] - a * self.wsin[k] + c * self.sinc[k];
        }
    }
}

pub fn propagate(state: &WaveState, delta: f64) -> Result<WaveState> {
    let grid = *state.u.grid();
    let tables = PropagatorTables::new(&grid, delta)?;
    let mut u = state.u.spectrum().to_vec();
    let mut v = state.v.spectrum().to_vec();
    tables.apply(&mut u, &mut v);
    Ok(WaveState {
        u: Field::from_spectrum(grid, u),
        v: Field::from_spectrum(grid, v),
        t: state.t + delta,
    })
}

/// `Σ_k |v̂|² + ω²|û|²`.
pub fn energy(state: &WaveState) -> f64 {
    let g = state.u.grid();
    let u = state.u.spectrum();
    let v = state.v.spectrum();
    (0..g.len())
        .map(|k| {
            let w = g.omega(k);
            v[k].norm_sqr() + w * w * u[k].norm_sqr()
        })
        .sum()
}

/// Initial position `v₀`, initial velocity `ṽ₀` and their Hölder exponents.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub v0: Field,
    pub v0_dot: Field,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl InitialData {
    pub fn new(v0: Field, v0_dot: Field, gamma1: f64, gamma2: f64) -> Result<Self> {
        v0.check_same_grid(&v0_dot)?;
        for (name, g) in [("gamma1", gamma1), ("gamma2", gamma2)] {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::domain(format!("{name} must lie in (0, 1], got {g}")));
            }
        }
        Ok(InitialData { v0, v0_dot, gamma1, gamma2 })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        InitialData { v0: Field::zeros(grid), v0_dot: Field::zeros(grid), gamma1: 1.0, gamma2: 1.0 }
    }

    pub fn state(&self) -> WaveState {
        WaveState { u: self.v0.clone(), v: self.v0_dot.clone(), t: 0.0 }
    }
}

/// `X⁰(t) = G(t)⋆ṽ₀ + (d/dt)G(t)⋆v₀`.
pub fn initial_field(data: &InitialData, t: f64) -> Result<Field> {
    Ok(propagate(&data.state(), t)?.u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> TorusGrid {
        TorusGrid::new(4.0, 16).unwrap()
    }

    fn smooth(g: TorusGrid, a: f64) -> Field {
        let w = g.dxi();
        Field::from_fn(g, |p| (w * p[0] + a).sin() * (2.0 * w * p[1]).cos() + 0.3 * (w * (p[2] - p[0])).cos())
    }

    #[test]
    fn zero_state_stays_zero() {
        let s = propagate(&WaveState::zeros(grid()), 0.7).unwrap();
        assert_eq!(s.u.max_abs(), 0.0);
        assert_eq!(s.v.max_abs(), 0.0);
        assert!((s.t - 0.7).abs() < 1e-15);
    }

    #[test]
    fn negative_step_rejected() {
        assert!(propagate(&WaveState::zeros(grid()), -0.1).is_err());
    }

    #[test]
    fn quarter_period_single_mode() {
        let g = grid();
        let w = g.dxi();
        let u = Field::from_fn(g, |p| (w * p[0]).cos());
        let s = WaveState::new(u, Field::zeros(g), 0.0).unwrap();
        let out = propagate(&s, 0.5 * PI / w).unwrap();
        assert!(out.u.max_abs() < 1e-10);
        for i in 0..g.len() {
            let want = -w * (w * g.point(i)[0]).cos();
            assert!((out.v.values()[i] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn time_reversal() {
        let g = grid();
        let s = WaveState::new(smooth(g, 0.1), smooth(g, 1.3), 0.0).unwrap();
        let fwd = propagate(&s, 0.83).unwrap();
        let flipped = WaveState::new(fwd.u.clone(), fwd.v.scale(-1.0), 0.0).unwrap();
        let back = propagate(&flipped, 0.83).unwrap();
        for i in 0..g.len() {
            assert!((back.u.values()[i] - s.u.values()[i]).abs() < 1e-10);
            assert!((-back.v.values()[i] - s.v.values()[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn energy_conserved() {
        let g = grid();
        let s = WaveState::new(smooth(g, 0.4), smooth(g, 2.0), 0.0).unwrap();
        let e0 = energy(&s);
        let e1 = energy(&propagate(&s, 1.0).unwrap());
        assert!((e1 - e0).abs() / e0 < 1e-10);
    }

    #[test]
    fn constants_and_linear_growth() {
        let g = grid();
        let c = InitialData::new(Field::constant(g, 2.5), Field::zeros(g), 1.0, 1.0).unwrap();
        let d = InitialData::new(Field::zeros(g), Field::constant(g, 2.5), 1.0, 1.0).unwrap();
        for t in [0.0, 0.3, 1.7] {
            let a = initial_field(&c, t).unwrap();
            let b = initial_field(&d, t).unwrap();
            for i in 0..g.len() {
                assert!((a.values()[i] - 2.5).abs() < 1e-12);
                assert!((b.values()[i] - 2.5 * t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn separated_solution_at_n32() {
        let g = TorusGrid::new(4.0, 32).unwrap();
        let w = g.dxi();
        let data = InitialData::new(Field::from_fn(g, |p| (w * p[0]).cos()), Field::zeros(g), 1.0, 1.0).unwrap();
        for t in [0.1, 0.5, 1.0] {
            let x = initial_field(&data, t).unwrap();
            let err = (0..g.len())
                .map(|i| (x.values()[i] - (w * t).cos() * (w * g.point(i)[0]).cos()).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "t={t}: {err}");
        }
    }

    #[test]
    fn forced_step_matches_quadratic_growth() {
        let g = grid();
        let tab = PropagatorTables::new(&g, 0.25).unwrap();
        let mut u = vec![Complex64::default(); g.len()];
        let mut v = u.clone();
        let mut f = u.clone();
        f[0] = Complex64::new(3.0, 0.0);
        for _ in 0..4 {
            tab.apply_forced(&mut u, &mut v, &f);
        }
        // u'' = 3 from rest: u(1) = 3/2, v(1) = 3
        assert!((u[0].re - 1.5).abs() < 1e-14);
        assert!((v[0].re - 3.0).abs() < 1e-14);
    }
}
