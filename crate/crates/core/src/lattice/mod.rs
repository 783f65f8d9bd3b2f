//! Periodic lattice standing in for ℝ³, its unitary transform, and the noise
//! Hilbert space ℋ computed on the Fourier side and on the kernel side.

mod fft;
mod field;
mod grid;
mod hilbert;
mod modes;
mod weights;

pub use fft::{Fft3, Spectrum};
pub use field::Field;
pub use grid::TorusGrid;
pub use hilbert::{
    reference_width,
    calibrate_kernel_constant, cell_self_interaction, h_inner_spectral, h_norm_kernel,
    h_norm_kernel_direct, h_norm_spectral, riesz_fourier_constant, KernelNorm,
};
pub use modes::{ModeIndexMap, ModeLabel};
pub use weights::{make_weights, zero_cell_integral, CellRule, SpectralWeights};
