use serde::Serialize;

use super::eigen::{self, Problem, Settings};
use crate::dec::{Cochain, OperatorSet};
use crate::error::Result;

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    /// smallest positive eigenvalue of `δd` on 0-cochains
    pub lambda_min: f64,
    /// a normalized eigenfunction for `lambda_min`
    #[serde(skip)]
    pub eigenfunction: Cochain,
    /// `‖K x − λ M0 x‖ / ‖M0 x‖`
    pub residual: f64,
    pub iterations: usize,
}

/// Smallest nonzero generalized eigenvalue of `K x = λ M0 x` with constants deflated.
pub fn lambda_min(ops: &OperatorSet) -> Result<SpectralReport> {
    lambda_min_with(ops, ops.options().harmonic_tol, 300)
}

pub fn lambda_min_with(ops: &OperatorSet, tol: f64, max_iter: usize) -> Result<SpectralReport> {
    let apply_a = |x: &[f64]| ops.stiffness().matvec(x);
    let apply_b = |x: &[f64]| ops.m0().matvec(x);
    let shift_solve = |y: &[f64]| {
        // y = M0 x with x mean-free sums to zero up to round-off
        let mut r = y.to_vec();
        let s = r.iter().sum::<f64>() / r.len() as f64;
        r.iter_mut().for_each(|v| *v -= s);
        ops.solve_stiffness_pinned(&r)
    };
    let project = |x: &mut [f64]| ops.remove_mean(x);
    let problem = Problem {
        n: ops.n_vertices(),
        apply_a: &apply_a,
        apply_b: &apply_b,
        shift_solve: &shift_solve,
        project: Some(&project),
        deflated: 1,
    };
    let settings = Settings {
        converge: 1,
        block: 12,
        max_iter,
        min_iter: 2,
        tol,
        accept_tol: tol,
        scale_index: 0,
        seed: 0x6c61_6d62,
    };
    let pairs = eigen::lowest(&problem, &settings)?;
    Ok(SpectralReport {
        lambda_min: pairs.values[0],
        eigenfunction: Cochain::new(0, pairs.vectors[0].clone()),
        residual: pairs.residuals[0],
        iterations: pairs.iterations,
    })
}
