//! Discrete exterior calculus on closed triangulated surfaces, with a
//! Hodge–Helmholtz integrator for the incompressible Euler equations and
//! executable stability experiments around harmonic flows.
//!
//! Module map:
//! - [`mesh`]: closed oriented triangle meshes, OFF I/O, generators.
//! - [`dec`]: cochains and the Whitney–Galerkin operators `d`, `δ`, `⋆`, `∧`.
//! - [`hodge`]: harmonic 1-form basis, spectral bounds, Poisson solves, Hodge decomposition.
//! - [`dynamics`]: the nonlinear flow in vorticity / harmonic-coefficient variables.
//! - [`stability`]: linearized harmonic-flow dynamics and harmonic perturbations.
//! - [`cli`]: experiment configuration, serialization and the command-line runner.

pub mod cli;
pub mod dec;
pub mod dynamics;
pub mod error;
pub mod hodge;
pub mod mesh;
pub mod sparse;
pub mod stability;

pub use error::{Error, Result};
