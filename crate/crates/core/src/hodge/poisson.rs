use crate::dec::{Cochain, OperatorSet};
use crate::error::{Error, Result};
use crate::sparse::{axpy, dot, norm2};

use super::HarmonicBasis;

/// Checks `|⟨ω, 1⟩| ≤ 1e-10 · ‖ω‖ · ‖1‖`.
pub fn check_zero_mean(ops: &OperatorSet, omega: &Cochain) -> Result<()> {
    omega.expect_degree(0)?;
    omega.expect_len(ops.n_vertices())?;
    let mean = ops.integral0(omega.values());
    let tolerance = 1e-10 * ops.norm(omega)? * ops.total_area().sqrt();
    if mean.abs() > tolerance {
        return Err(Error::IncompatibleRhs { mean, tolerance });
    }
    Ok(())
}

/// Mean-free `ψ` with `−δdψ = ω`.
pub fn poisson_solve(ops: &OperatorSet, omega: &Cochain) -> Result<Cochain> {
    check_zero_mean(ops, omega)?;
    let mut rhs = ops.m0().matvec(omega.values());
    rhs.iter_mut().for_each(|v| *v = -*v);
    // remove the round-off mean so the pinned system is consistent
    let rhs = sum_free(rhs);
    let scale = norm2(&rhs);
    if scale == 0.0 {
        return Ok(Cochain::zeros(0, ops.n_vertices()));
    }

    let mut psi = ops.solve_stiffness_pinned(&rhs);
    let mut residual = 0.0;
    for _ in 0..3 {
        let mut r = rhs.clone();
        axpy(-1.0, &ops.stiffness().matvec(&psi), &mut r);
        residual = norm2(&r) / scale;
        if residual <= ops.options().linear_tol {
            break;
        }
        axpy(1.0, &ops.solve_stiffness_pinned(&sum_free(r)), &mut psi);
    }
    if residual.is_nan() || residual > ops.options().linear_tol {
        return Err(Error::Solver(format!(
            "Poisson residual {residual:e} above tolerance"
        )));
    }
    ops.remove_mean(&mut psi);
    Ok(Cochain::new(0, psi))
}

pub(crate) fn sum_free(mut v: Vec<f64>) -> Vec<f64> {
    let s = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= s);
    v
}

/// Parts of `v = ⋆dψ + γ + remainder`.
#[derive(Clone, Debug)]
pub struct HodgeDecomposition {
    /// mean-free stream function
    pub psi: Cochain,
    /// vorticity `⋆dv`
    pub omega: Cochain,
    /// `⋆dψ`
    pub coexact: Cochain,
    pub gamma: Cochain,
    /// coordinates of `gamma` in the harmonic basis
    pub coefficients: Vec<f64>,
    /// `v − ⋆dψ − γ`: the gradient part plus discretization residue
    pub remainder: Cochain,
    pub iterations: usize,
}

impl HodgeDecomposition {
    /// `⟨⋆dψ, γ⟩`
    pub fn orthogonality_defect(&self, ops: &OperatorSet) -> Result<f64> {
        ops.inner(&self.coexact, &self.gamma)
    }
}

/// Splits a 1-cochain into its coexact part `⋆dψ` (M1-closest element of the
/// image of `⋆d`), its harmonic part and a remainder.
pub fn hodge_decompose(
    ops: &OperatorSet,
    basis: &HarmonicBasis,
    v: &Cochain,
) -> Result<HodgeDecomposition> {
    v.expect_degree(1)?;
    v.expect_len(ops.n_edges())?;
    let omega = ops.star2(&ops.d(v)?)?;

    // normal equations (W1 d0)ᵀ M1⁻¹ (W1 d0) ψ = (W1 d0)ᵀ v, preconditioned by K;
    // right-hand sides are kept exactly sum-free so the singular system stays consistent
    let g = |x: &[f64]| {
        let y = ops.solve_m1(&ops.w1().matvec(&ops.d0().matvec(x)));
        sum_free(ops.d0().tmatvec(&ops.w1().tmatvec(&y)))
    };
    let precond = |r: &[f64]| {
        let mut z = ops.solve_stiffness_pinned(r);
        ops.remove_mean(&mut z);
        z
    };
    let w1tv = ops.w1().tmatvec(v.values());
    let b = sum_free(ops.d0().tmatvec(&w1tv));
    // absolute floor: cancellation in d0ᵀ leaves round-off of size ε‖W1ᵀv‖
    let atol = (1e-13 * norm2(&b)).max(1e-15 * norm2(&w1tv));
    let (mut psi, iterations) = pcg(&g, &precond, &b, atol, 1000)?;
    ops.remove_mean(&mut psi);
    let psi = Cochain::new(0, psi);

    let coexact = ops.star1(&ops.d(&psi)?)?;
    let rest = v - &coexact;
    let coefficients = basis.coefficients(ops, &rest)?;
    let gamma = basis.combine(&coefficients)?;
    let remainder = &rest - &gamma;
    Ok(HodgeDecomposition {
        psi,
        omega,
        coexact,
        gamma,
        coefficients,
        remainder,
        iterations,
    })
}

/// Preconditioned conjugate gradients from a zero initial guess, stopped at `‖r‖ ≤ atol`.
fn pcg(
    a: &dyn Fn(&[f64]) -> Vec<f64>,
    m_inv: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    atol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let nb = norm2(b);
    let mut x = vec![0.0; b.len()];
    if nb <= atol {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut z = m_inv(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = a(&p);
        let alpha = rz / dot(&p, &ap);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let res = norm2(&r);
        if res <= atol {
            return Ok((x, it));
        }
        z = m_inv(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut()
            .zip(&z)
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
        if !res.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: norm2(&r) / nb,
    })
}
