use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::propagator::PropagatorTables;
use crate::error::{Error, Result};
use crate::lattice::Field;
use crate::quadrature::GaussLegendre;

/// Off-grid evaluation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interp {
    #[default]
    Trilinear,
    /// Band-limited interpolant; exact for lattice modes, O(N³) per point.
    Spectral,
}

/// Total mass of `G(t) = σ_t/(4πt)`.
pub fn green_mass(t: f64) -> f64 {
    t
}

pub fn spherical_mean(phi: &Field, x: [f64; 3], r: f64, quad_order: usize) -> Result<f64> {
    spherical_mean_with(phi, x, r, quad_order, Interp::Trilinear)
}

/// Average of `φ` over the sphere of radius `r` about `x`: Gauss–Legendre
/// in the polar cosine times `2·order` equispaced longitudes.
pub fn spherical_mean_with(phi: &Field, x: [f64; 3], r: f64, quad_order: usize, interp: Interp) -> Result<f64> {
    if quad_order < 6 {
        return Err(Error::domain(format!("sphere quadrature order must be >= 6, got {quad_order}")));
    }
    let g = phi.grid();
    let limit = 0.5 * g.side() - g.spacing();
    if !(r >= 0.0 && r <= limit) {
        return Err(Error::domain(format!(
            "radius {r} exceeds the shielded limit {limit} of this torus"
        )));
    }
    let gl = GaussLegendre::get(quad_order);
    let nphi = 2 * quad_order;
    let mut acc = 0.0;
    for (c, wc) in gl.on(-1.0, 1.0) {
        let s = (1.0 - c * c).max(0.0).sqrt();
        let mut ring = 0.0;
        for m in 0..nphi {
            let a = 2.0 * PI * (m as f64 + 0.5) / nphi as f64;
            let p = [x[0] + r * s * a.cos(), x[1] + r * s * a.sin(), x[2] + r * c];
            ring += match interp {
                Interp::Trilinear => phi.trilinear(p),
                Interp::Spectral => phi.spectral_eval(p),
            };
        }
        acc += wc * ring / nphi as f64;
    }
    Ok(0.5 * acc)
}

/// `G(t)⋆φ` through the propagator: the position after time `t` starting
/// from rest with velocity `φ`.
pub fn green_convolution_spectral(phi: &Field, t: f64) -> Result<Field> {
    let g = *phi.grid();
    let tab = PropagatorTables::new(&g, t)?;
    let spec: Vec<_> = phi.spectrum().iter().zip(&tab.sinc).map(|(c, s)| c * *s).collect();
    Ok(Field::from_spectrum(g, spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::TorusGrid;

    #[test]
    fn constant_mean() {
        let g = TorusGrid::new(4.0, 16).unwrap();
        let f = Field::constant(g, 1.7);
        for r in [0.0, 0.3, 1.2] {
            let m = spherical_mean(&f, [2.0, 2.0, 2.0], r, 8).unwrap();
            assert!((m - 1.7).abs() < 1e-13);
            // discretised G(r) has mass r
            assert!((r * spherical_mean(&Field::constant(g, 1.0), [1.0, 2.0, 3.0], r, 8).unwrap() - green_mass(r)).abs() < 1e-13);
        }
    }

    #[test]
    fn green_mass_values() {
        assert_eq!(green_mass(0.0), 0.0);
        assert_eq!(green_mass(1.0), 1.0);
        assert_eq!(green_mass(0.37), 0.37);
    }

    #[test]
    fn odd_field_has_zero_mean() {
        let g = TorusGrid::new(8.0, 32).unwrap();
        let c = [4.0, 4.0, 4.0];
        let f = Field::from_fn(g, |p| p[0] - c[0]);
        let m = spherical_mean(&f, c, 1.3, 10).unwrap();
        assert!(m.abs() < 1e-10, "{m}");
    }

    #[test]
    fn offset_gaussian_closed_form() {
        // bump of width σ at distance a from the centre of a sphere of radius r:
        // mean = σ²/(2ra)·(e^{-(r-a)²/2σ²} - e^{-(r+a)²/2σ²})
        let g = TorusGrid::new(8.0, 64).unwrap();
        let (sig, r, a) = (1.0, 1.0, 0.6);
        let c = [4.0, 4.0, 4.0];
        let f = Field::from_fn(g, |p| {
            let d2 = (p[0] - c[0] - a).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2);
            (-0.5 * d2 / (sig * sig)).exp()
        });
        let want = sig * sig / (2.0 * r * a)
            * ((-(r - a) * (r - a) / (2.0 * sig * sig)).exp() - (-(r + a) * (r + a) / (2.0 * sig * sig)).exp());
        let tri = spherical_mean(&f, c, r, 16).unwrap();
        assert!((tri - want).abs() < 2e-3, "{tri} {want}");
        let spec = spherical_mean_with(&f, c, r, 16, Interp::Spectral).unwrap();
        assert!((spec - want).abs() < 1e-6, "{spec} {want}");
    }

    #[test]
    fn radius_and_order_guards() {
        let g = TorusGrid::new(4.0, 16).unwrap();
        let f = Field::zeros(g);
        assert!(spherical_mean(&f, [0.0; 3], 1.9, 8).is_err());
        assert!(spherical_mean(&f, [0.0; 3], 0.5, 5).is_err());
    }
}
