use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::fft::Fft3;
use super::field::Field;
use super::grid::TorusGrid;
use super::weights::SpectralWeights;
use crate::error::{Error, Result};
use crate::quadrature::{pairwise_sum, GaussLegendre};

fn check_grid(phi: &Field, w: &SpectralWeights) -> Result<()> {
    if phi.grid().same_as(w.grid()) {
        Ok(())
    } else {
        Err(Error::Shape("field and weights live on different grids".into()))
    }
}

/// `⟨φ, ψ⟩_ℋ = Σ_k ŵ(k)·(2π/L)³·ℱφ(k)·conj ℱψ(k)`, where `ℱ` is the
/// continuum Fourier transform approximated by `h³ N^{3/2}` times the
/// unitary coefficients.
pub fn h_inner_spectral(phi: &Field, psi: &Field, w: &SpectralWeights) -> Result<f64> {
    check_grid(phi, w)?;
    check_grid(psi, w)?;
    let g = w.grid();
    let a = phi.spectrum();
    let b = psi.spectrum();
    let terms: Vec<f64> = (0..g.len())
        .map(|k| w.at(k) * (a[k] * b[k].conj()).re)
        .collect();
    let f = g.spacing().powi(3) * (g.len() as f64).sqrt();
    Ok(pairwise_sum(&terms) * g.cell_volume() * f * f)
}

/// Squared spectral norm `⟨φ, φ⟩_ℋ`.
pub fn h_norm_spectral(phi: &Field, w: &SpectralWeights) -> Result<f64> {
    h_inner_spectral(phi, phi, w)
}

/// Mean of `|u - v|^{-β}` for `u, v` uniform in one cube of side `h`.
///
/// Reduces to a smooth integral over one face of the difference cube after
/// integrating the radial variable in closed form.
pub fn cell_self_interaction(h: f64, beta: f64) -> f64 {
    let g = GaussLegendre::get(48);
    let b = beta;
    let mut acc = 0.0;
    for (a, wa) in g.on(0.0, 1.0) {
        for (c, wc) in g.on(0.0, 1.0) {
            let poly = 1.0 / (3.0 - b) - (1.0 + a + c) / (4.0 - b) + (a + c + a * c) / (5.0 - b)
                - a * c / (6.0 - b);
            acc += wa * wc * (1.0 + a * a + c * c).powf(-0.5 * b) * poly;
        }
    }
    24.0 * acc * h.powf(-beta)
}

/// The constant `c` in `∫|ξ|^{β-3} e^{iξ·z} dξ = c |z|^{-β}`.
pub fn riesz_fourier_constant(beta: f64) -> f64 {
    PI.powf(1.5) * 2f64.powf(beta) * gamma(beta / 2.0) / gamma((3.0 - beta) / 2.0)
}

/// Kernel-side ℋ norm on a fixed grid.
///
/// Holds the transformed minimal-image Riesz table so that repeated norm
/// evaluations cost two transforms each.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelNorm {
    grid: TorusGrid,
    beta: f64,
    /// Multiplier of the double sum.
    pub constant: f64,
    /// Self-interaction value used on the diagonal.
    pub diagonal: f64,
    #[serde(skip)]
    table_hat: Vec<f64>,
}

impl KernelNorm {
    /// Builds the kernel table and uses `constant` as the multiplier.
    pub fn with_constant(grid: &TorusGrid, beta: f64, constant: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 2.0) {
            return Err(Error::domain(format!("beta must lie in (0, 2), got {beta}")));
        }
        let h = grid.spacing();
        let diagonal = cell_self_interaction(h, beta);
        let table: Vec<f64> = (0..grid.len())
            .map(|idx| {
                if idx == 0 {
                    diagonal
                } else {
                    let k = grid.freq3(idx);
                    let r2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64 * h * h;
                    r2.powf(-0.5 * beta)
                }
            })
            .collect();
        let spec = Fft3::new(grid).forward_real(&table);
        let table_hat = spec.iter().map(|c| c.re).collect();
        Ok(KernelNorm { grid: *grid, beta, constant, diagonal, table_hat })
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `h⁶ Σ_x Σ_y φ(x) φ(y) r(x - y)` without the multiplier.
    pub fn raw_double_sum(&self, phi: &Field) -> Result<f64> {
        if !phi.grid().same_as(&self.grid) {
            return Err(Error::Shape("field and kernel table live on different grids".into()));
        }
        let s = phi.spectrum();
        let terms: Vec<f64> = s
            .iter()
            .zip(&self.table_hat)
            .map(|(c, &k)| k * c.norm_sqr())
            .collect();
        let h3 = self.grid.spacing().powi(3);
        Ok(pairwise_sum(&terms) * (self.grid.len() as f64).sqrt() * h3 * h3)
    }

    pub fn norm_sq(&self, phi: &Field) -> Result<f64> {
        Ok(self.constant * self.raw_double_sum(phi)?)
    }

    /// Polarised inner product from two kernel norms.
    pub fn inner(&self, phi: &Field, psi: &Field) -> Result<f64> {
        let p = self.norm_sq(&phi.add(psi)?)?;
        let m = self.norm_sq(&phi.sub(psi)?)?;
        Ok(0.25 * (p - m))
    }
}

/// Gaussian bump of width `sigma` centred in the box.
pub(crate) fn reference_bump(grid: &TorusGrid, sigma: f64) -> Field {
    let c = 0.5 * grid.side();
    Field::from_fn(*grid, |p| {
        let r2: f64 = p.iter().map(|x| (x - c) * (x - c)).sum();
        (-0.5 * r2 / (sigma * sigma)).exp()
    })
}

/// Width of the calibration bump: geometric mean of `4h` and `L/8`.
pub fn reference_width(grid: &TorusGrid) -> f64 {
    (4.0 * grid.spacing() * grid.side() / 8.0).sqrt()
}

/// Fixes the kernel multiplier so that both sides agree on the reference bump.
pub fn calibrate_kernel_constant(w: &SpectralWeights) -> Result<KernelNorm> {
    let g = w.grid();
    let mut kn = KernelNorm::with_constant(g, w.beta(), 1.0)?;
    let bump = reference_bump(g, reference_width(g));
    let spectral = h_norm_spectral(&bump, w)?;
    let raw = kn.raw_double_sum(&bump)?;
    kn.constant = spectral / raw;
    Ok(kn)
}

/// Squared kernel-side norm with a calibrated multiplier.
pub fn h_norm_kernel(phi: &Field, w: &SpectralWeights) -> Result<f64> {
    calibrate_kernel_constant(w)?.norm_sq(phi)
}

/// Direct pairwise evaluation of the raw double sum; O(N⁶), small grids only.
pub fn h_norm_kernel_direct(phi: &Field, kn: &KernelNorm) -> Result<f64> {
    let g = *phi.grid();
    if g.n() > 16 {
        return Err(Error::domain("direct double sum is limited to N <= 16"));
    }
    let v = phi.values();
    let pts: Vec<[f64; 3]> = (0..g.len()).map(|i| g.point(i)).collect();
    let rows: Vec<f64> = (0..g.len())
        .map(|i| {
            let mut row = 0.0;
            for j in 0..g.len() {
                let r = if i == j {
                    kn.diagonal
                } else {
                    g.torus_distance(pts[i], pts[j]).powf(-kn.beta)
                };
                row += v[j] * r;
            }
            v[i] * row
        })
        .collect();
    let h3 = g.spacing().powi(3);
    Ok(kn.constant * pairwise_sum(&rows) * h3 * h3)
}
