//! Spectral layer: harmonic 1-forms, the smallest positive eigenvalue of `δd`
//! on functions, mean-free Poisson solves and the Hodge–Helmholtz split.
//!
//! Eigenproblems are solved by block shift-invert subspace iteration with
//! Rayleigh–Ritz extraction. The 1-form Laplacian is never formed; its shifted
//! inverse is applied through a sparse LU of the mixed system
//! `[[-M0, d0ᵀM1], [M1 d0, d1ᵀM2 d1 + τ M1]]`.

mod eigen;
mod harmonic;
mod poisson;
mod spectral;

pub use harmonic::{harmonic_basis, HarmonicBasis, MIN_SPECTRAL_GAP};
pub(crate) use poisson::sum_free;
pub use poisson::{check_zero_mean, hodge_decompose, poisson_solve, HodgeDecomposition};
pub use spectral::{lambda_min, lambda_min_with, SpectralReport};
