//! Deterministic wave machinery: the exact spectral propagator, spherical
//! means of the Green measure, the kernel integrals `μ₁, μ₂, μ₄` and the
//! exponent arithmetic behind the Sobolev moment bounds.

mod difference;
mod exponents;
mod mu;
mod propagator;
mod sphere;

pub use difference::{difference_ops, Kernel};
pub use exponents::{check_exponents, ExponentReport};
pub use mu::{mu1_diagonal_closed_form, mu_integral, mu_integral_once, MuKind, MuQuad, MuRow, MuValue};
pub use propagator::{energy, initial_field, propagate, InitialData, PropagatorTables, WaveState};
pub use sphere::{green_convolution_spectral, green_mass, spherical_mean, spherical_mean_with, Interp};
