use std::sync::OnceLock;

use rustfft::num_complex::Complex64;

use super::fft::{Fft3, Spectrum};
use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// Real samples on a grid, with a lazily computed unitary spectrum.
#[derive(Debug, Clone)]
pub struct Field {
    grid: TorusGrid,
    values: Vec<f64>,
    spectrum: OnceLock<Spectrum>,
}

impl Field {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite field value at index {i}")));
        }
        Ok(Field { grid, values, spectrum: OnceLock::new() })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Field { grid, values: vec![0.0; grid.len()], spectrum: OnceLock::new() }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Field { grid, values: vec![c; grid.len()], spectrum: OnceLock::new() }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Field { grid, values, spectrum: OnceLock::new() }
    }

    /// Builds a real field from Hermitian coefficients; the imaginary residue is dropped.
    pub fn from_spectrum(grid: TorusGrid, spec: Spectrum) -> Self {
        let mut fft = Fft3::new(&grid);
        let values = fft.inverse_real(&spec);
        let cell = OnceLock::new();
        let _ = cell.set(spec);
        Field { grid, values, spectrum: cell }
    }

    #[inline]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| Fft3::new(&self.grid).forward_real(&self.values))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::Shape("fields live on different grids".into()))
        }
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        let v = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Field { grid: self.grid, values: v, spectrum: OnceLock::new() })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        let v = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Field { grid: self.grid, values: v, spectrum: OnceLock::new() })
    }

    pub fn scale(&self, c: f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
            spectrum: OnceLock::new(),
        }
    }

    /// Trilinear interpolation at an arbitrary point, periodic wrap.
    pub fn trilinear(&self, x: [f64; 3]) -> f64 {
        let g = &self.grid;
        let h = g.spacing();
        let mut base = [0i64; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let s = x[a] / h;
            let f = s.floor();
            base[a] = f as i64;
            frac[a] = s - f;
        }
        let mut acc = 0.0;
        for c in 0..8 {
            let d = [(c >> 2) & 1, (c >> 1) & 1, c & 1];
            let mut w = 1.0;
            for a in 0..3 {
                w *= if d[a] == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            if w != 0.0 {
                let idx = g.wrap(base[0] + d[0] as i64, base[1] + d[1] as i64, base[2] + d[2] as i64);
                acc += w * self.values[idx];
            }
        }
        acc
    }

    /// Trigonometric interpolation: evaluates the band-limited interpolant.
    ///
    /// The Nyquist planes are split symmetrically so the result is real.
    pub fn spectral_eval(&self, x: [f64; 3]) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let half = (n / 2) as i64;
        let spec = self.spectrum();
        let dxi = g.dxi();
        // per-axis phase tables e^{i ξ x}, with index = storage index
        let mut tables = [vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n]];
        for a in 0..3 {
            for (i, slot) in tables[a].iter_mut().enumerate() {
                let k = g.freq(i);
                if k == -half {
                    // cos part only, shared by ±N/2
                    *slot = Complex64::new((dxi * half as f64 * x[a]).cos(), 0.0);
                } else {
                    *slot = Complex64::from_polar(1.0, dxi * k as f64 * x[a]);
                }
            }
        }
        let mut acc = Complex64::default();
        for i in 0..n {
            for j in 0..n {
                let pij = tables[0][i] * tables[1][j];
                let row = &spec[(i * n + j) * n..(i * n + j + 1) * n];
                let mut s = Complex64::default();
                for k in 0..n {
                    s += row[k] * tables[2][k];
                }
                acc += pij * s;
            }
        }
        acc.re / (g.len() as f64).sqrt()
    }
}
