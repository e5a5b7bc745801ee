//! Discrete exterior calculus on triangle meshes with Whitney elements.
//!
//! Cochains live on the primal mesh only. Mass matrices come from Whitney
//! interpolation, `⋆` on 1-forms is the Galerkin rotation `M1⁻¹ W1`, and the
//! codifferential is the mass-adjoint of `d`, so that `⟨δα, β⟩ = ⟨α, dβ⟩`
//! holds to solver precision.

mod cochain;
pub mod fields;
pub mod geometry;
mod operators;

pub use cochain::Cochain;
pub use operators::{OperatorOptions, OperatorSet, WedgeRule};
