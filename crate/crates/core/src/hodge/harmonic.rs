use serde::Serialize;

use super::eigen::{self, Problem, Settings};
use crate::dec::{fields, Cochain, OperatorSet};
use crate::error::{Error, Result};
use crate::sparse::{dot, CsrMatrix, SparseLu};

/// Minimum ratio between the first discarded and the last retained eigenvalue.
pub const MIN_SPECTRAL_GAP: f64 = 10.0;

/// Hodge-orthonormal basis of the discrete harmonic 1-forms.
#[derive(Clone, Debug, Serialize)]
pub struct HarmonicBasis {
    #[serde(skip)]
    pub forms: Vec<Cochain>,
    /// `max |⟨h^i, h^j⟩ − δ_ij|`
    pub gram_defect: f64,
    /// `max_i ‖M1⁻¹ L1 h^i‖ / ‖h^i‖` in mass norms
    pub residual: f64,
    /// lowest `2g + 1` eigenvalues of the 1-form Hodge Laplacian
    pub eigenvalues: Vec<f64>,
    /// first discarded over last retained eigenvalue, capped at `1/ε`
    pub spectral_gap: f64,
    pub iterations: usize,
}

impl HarmonicBasis {
    /// The zero-dimensional basis of a genus-0 surface.
    pub fn trivial() -> Self {
        HarmonicBasis {
            forms: Vec::new(),
            gram_defect: 0.0,
            residual: 0.0,
            eigenvalues: Vec::new(),
            spectral_gap: f64::INFINITY,
            iterations: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.forms.len()
    }

    /// Coefficients `⟨v, h^i⟩` of the M1-orthogonal projection onto the basis.
    pub fn coefficients(&self, ops: &OperatorSet, v: &Cochain) -> Result<Vec<f64>> {
        self.forms.iter().map(|h| ops.inner(v, h)).collect()
    }

    /// `Σ c_i h^i`
    pub fn combine(&self, c: &[f64]) -> Result<Cochain> {
        if c.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                found: c.len(),
            });
        }
        let n = self.forms.first().map_or(0, Cochain::len);
        let mut out = Cochain::zeros(1, n);
        for (ci, h) in c.iter().zip(&self.forms) {
            out.axpy(*ci, h);
        }
        Ok(out)
    }

    pub fn project(&self, ops: &OperatorSet, v: &Cochain) -> Result<Cochain> {
        self.combine(&self.coefficients(ops, v)?)
    }
}

/// Applies the 1-form Hodge Laplacian `S1 = M1 d0 M0⁻¹ d0ᵀ M1 + d1ᵀ M2 d1`.
pub(crate) fn apply_s1(ops: &OperatorSet, x: &[f64]) -> Vec<f64> {
    let m1x = ops.m1().matvec(x);
    let sigma = ops.solve_m0(&ops.d0().tmatvec(&m1x));
    let mut out = ops.m1().matvec(&ops.d0().matvec(&sigma));
    let curl = ops.m2().matvec(&ops.d1().matvec(x));
    let rot = ops.d1().tmatvec(&curl);
    out.iter_mut().zip(rot).for_each(|(o, r)| *o += r);
    out
}

/// The `2·genus` lowest eigenmodes of the 1-form Hodge Laplacian, orthonormalized
/// in the Hodge inner product. On flat tori the basis is aligned with `(dx, dy)`.
pub fn harmonic_basis(ops: &OperatorSet, genus: usize, tol: f64) -> Result<HarmonicBasis> {
    if genus == 0 {
        return Err(Error::NoHarmonicForms);
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "harmonic tolerance must be positive, got {tol}"
        )));
    }
    let k = 2 * genus;
    let (nv, ne) = (ops.n_vertices(), ops.n_edges());
    let tau = 1.0 / ops.total_area();

    // mixed shift-invert system [[-M0, d0ᵀM1], [M1 d0, d1ᵀM2d1 + τM1]]
    let b = ops.m1().matmul(ops.d0());
    let rot = ops.d1().transpose().matmul(&ops.m2().matmul(ops.d1()));
    let block = CsrMatrix::block2x2(
        &ops.m0().scale(-1.0),
        &b.transpose(),
        &b,
        &rot.add_scaled(ops.m1(), tau),
    );
    let lu = SparseLu::new(&block)?;

    let apply_a = |x: &[f64]| apply_s1(ops, x);
    let apply_b = |x: &[f64]| ops.m1().matvec(x);
    let shift_solve = |y: &[f64]| {
        let mut rhs = vec![0.0; nv + ne];
        rhs[nv..].copy_from_slice(y);
        lu.solve(&rhs)[nv..].to_vec()
    };
    let problem = Problem {
        n: ne,
        apply_a: &apply_a,
        apply_b: &apply_b,
        shift_solve: &shift_solve,
        project: None,
        deflated: 0,
    };
    let settings = Settings {
        converge: k,
        block: 2 * (k + 1) + 2,
        max_iter: 60,
        min_iter: 3,
        tol: 1e-2 * tol,
        accept_tol: tol,
        scale_index: k,
        seed: 0x4a52_6d6f,
    };
    let pairs = eigen::lowest(&problem, &settings)?;

    let eigenvalues = pairs.values[..=k].to_vec();
    let retained = eigenvalues[k - 1].max(f64::EPSILON * eigenvalues[k]);
    let spectral_gap = eigenvalues[k] / retained;
    if spectral_gap.is_nan() || spectral_gap <= MIN_SPECTRAL_GAP {
        return Err(Error::HarmonicSpaceUnresolved {
            gap: spectral_gap,
            threshold: MIN_SPECTRAL_GAP,
        });
    }

    let mut forms: Vec<Vec<f64>> = pairs.vectors[..k].to_vec();
    if let (Some(_), 1) = (ops.mesh().flat_chart(), genus) {
        forms = align_to_reference(ops, &forms)?;
    }
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    eigen::b_orthonormalize(&mut forms, &apply_b, None, &mut rng);
    let forms: Vec<Cochain> = forms.into_iter().map(|v| Cochain::new(1, v)).collect();

    let mut gram_defect: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for (i, hi) in forms.iter().enumerate() {
        for (j, hj) in forms.iter().enumerate() {
            let g = ops.inner(hi, hj)?;
            gram_defect = gram_defect.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
        let s = apply_s1(ops, hi.values());
        let r = dot(&s, &ops.solve_m1(&s)).max(0.0).sqrt() / ops.norm(hi)?;
        residual = residual.max(r);
    }
    if residual > tol * eigenvalues[k] {
        return Err(Error::NoConvergence {
            iterations: pairs.iterations,
            residual,
        });
    }
    Ok(HarmonicBasis {
        forms,
        gram_defect,
        residual,
        eigenvalues,
        spectral_gap,
        iterations: pairs.iterations,
    })
}

/// Replaces a basis of the harmonic space by the projections of `dx` and `dy`.
fn align_to_reference(ops: &OperatorSet, forms: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let refs = [fields::flat_dx(ops.mesh())?, fields::flat_dy(ops.mesh())?];
    Ok(refs
        .iter()
        .map(|r| {
            let mr = ops.m1().matvec(r.values());
            let mut out = vec![0.0; r.len()];
            for f in forms {
                crate::sparse::axpy(dot(f, &mr), f, &mut out);
            }
            out
        })
        .collect())
}
