//! Numerical laboratory for the three-dimensional stochastic wave equation
//! driven by Gaussian noise that is white in time and Riesz-correlated in
//! space, `E[Ṁ(t,x)Ṁ(s,y)] = δ(t-s)|x-y|^{-β}` with `β ∈ (0,2)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] periodic grid, unitary transforms, spectral weights and the
//!   noise Hilbert space `ℋ` (Fourier side and Riesz-kernel side).
//! * [`wavekernel`] the exact spectral wave propagator, spherical means,
//!   kernel integrals `μ₁, μ₂, μ₄` and exponent bookkeeping.
//! * [`noise`] Brownian families, the delayed dyadic smoothing `wⁿ`,
//!   localisation events and the shift/projection operator.
//! * [`solver`] pathwise-coupled time stepping of the mild solution, its
//!   smoothed-noise approximation, truncated processes, Picard iterates and
//!   the deterministic skeleton.
//! * [`norms`] Hölder and fractional Sobolev estimators, shrinking sets and
//!   Monte Carlo moment statistics.
//! * [`experiments`] study drivers, configuration files and CSV/JSON output.

pub mod error;
pub mod experiments;
pub mod lattice;
pub mod noise;
pub mod norms;
pub mod solver;
pub mod stats;
pub mod wavekernel;

mod quadrature;

pub use error::{Error, Result};
pub use lattice::{CellRule, Field, ModeIndexMap, SpectralWeights, TorusGrid};
pub use noise::{BrownianFamily, ControlPath, SeedRecord, SmoothedNoise};
pub use solver::{CoefficientSet, PathSolution, ScalarFn, SimConfig};
pub use wavekernel::{ExponentReport, InitialData, WaveState};
