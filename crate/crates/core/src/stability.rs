//! Stability experiments around harmonic flows.
//!
//! Linearization around a harmonic flow: the vorticity perturbation is transported by a steady
//! harmonic flow `γ₀`, its enstrophy is conserved, the stream function obeys
//! `⟨ψ̃,ψ̃⟩ ≤ ⟨ω̃,ω̃⟩ / λ_min²` and each harmonic coefficient of the velocity
//! perturbation grows at most linearly.
//!
//! Harmonic perturbations of an arbitrary flow obey
//! `ċ = A c` with the skew matrix `A_ij = ∫ ω₀ h^i ∧ h^j`, evolved by Cayley
//! steps that preserve `|c|`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dec::{Cochain, OperatorSet};
use crate::dynamics::{step_count, BLOW_UP_LIMIT};
use crate::error::{Error, Result};
use crate::hodge::{check_zero_mean, poisson_solve, HarmonicBasis, SpectralReport};

/// Tolerance on the non-harmonic part of `γ₀`.
pub const GAMMA0_TOLERANCE: f64 = 1e-6;

/// Series and bounds of one linearized run.
#[derive(Clone, Debug, Serialize)]
pub struct Thm1Report {
    pub times: Vec<f64>,
    /// `⟨ω̃, ω̃⟩(t)`
    pub enstrophy: Vec<f64>,
    /// `⟨ψ̃, ψ̃⟩(t)`
    pub stream: Vec<f64>,
    /// `c(t)`, one row per sample
    pub c: Vec<Vec<f64>>,
    /// slopes `B_k = ⟨ω̃₀,ω̃₀⟩^{1/2} (∫ (⋆γ₀, h^k)² μ)^{1/2}`
    pub bound_slopes: Vec<f64>,
    /// spread of `(⋆γ₀, h^k)` over the surface, see [`variation`]
    pub constancy: Vec<f64>,
    /// relative size of the discarded non-harmonic part of `γ₀`
    pub gamma0_residual: f64,
    #[serde(skip)]
    pub omega: Vec<Cochain>,
}

impl Thm1Report {
    /// `(1/λ_min²) ⟨ω̃, ω̃⟩(t)`
    pub fn stream_bound(&self, spectral: &SpectralReport) -> Vec<f64> {
        let l2 = spectral.lambda_min * spectral.lambda_min;
        self.enstrophy.iter().map(|z| z / l2).collect()
    }

    /// `max_t |⟨ω̃,ω̃⟩(t) − ⟨ω̃,ω̃⟩(0)| / ⟨ω̃,ω̃⟩(0)`, zero for a vanishing perturbation.
    pub fn enstrophy_drift(&self) -> f64 {
        let z0 = self.enstrophy.first().copied().unwrap_or(0.0);
        let dev = self
            .enstrophy
            .iter()
            .map(|z| (z - z0).abs())
            .fold(0.0, f64::max);
        if z0 > 0.0 {
            dev / z0
        } else {
            dev
        }
    }

    /// Largest `|c_k(t) − c_k(0)| / (B_k t)` over samples with `t > 0`.
    pub fn growth_ratio(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (t, c) in self.times.iter().zip(&self.c).skip(1) {
            for (k, ck) in c.iter().enumerate() {
                let dev = (ck - self.c[0][k]).abs();
                let bound = self.bound_slopes[k] * t;
                if dev > 0.0 {
                    worst = worst.max(if bound > 0.0 {
                        dev / bound
                    } else {
                        f64::INFINITY
                    });
                }
            }
        }
        worst
    }
}

/// Coefficient of variation of a 0-cochain over the surface (area weighted).
/// When the mean is negligible against `scale`, the spread is reported
/// relative to `scale` instead.
pub fn variation(ops: &OperatorSet, f: &Cochain, scale: f64) -> Result<f64> {
    let area = ops.total_area();
    let mean = ops.integral0(f.values()) / area;
    let centered = Cochain::new(0, f.values().iter().map(|x| x - mean).collect());
    let std = (ops.inner(&centered, &centered)? / area).sqrt();
    let reference = if mean.abs() > 1e-8 * scale {
        mean.abs()
    } else {
        scale
    };
    Ok(if reference > 0.0 {
        std / reference
    } else {
        0.0
    })
}

/// Linearized transport `ω̃_t = −⋆d(ω̃ ⋆γ₀)`.
fn transport(ops: &OperatorSet, star_gamma: &Cochain, omega: &Cochain) -> Result<Cochain> {
    Ok(ops
        .star2(&ops.d(&ops.wedge01(omega, star_gamma)?)?)?
        .scaled(-1.0))
}

/// Evolves the vorticity perturbation around the harmonic flow `gamma0` by RK4,
/// integrates `ċ_k = −∫ ω̃ (⋆γ₀, h^k) μ` with the trapezoid rule and records
/// every `sample_every` steps.
pub fn linearize_thm1(
    ops: &OperatorSet,
    basis: &HarmonicBasis,
    gamma0: &Cochain,
    omega0: &Cochain,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Thm1Report> {
    check_zero_mean(ops, omega0)?;
    gamma0.expect_degree(1)?;
    let projected = basis.project(ops, gamma0)?;
    let g_norm = ops.norm(gamma0)?;
    let gamma0_residual = if g_norm > 0.0 {
        ops.norm(&(gamma0 - &projected))? / g_norm
    } else {
        0.0
    };
    if gamma0_residual > GAMMA0_TOLERANCE {
        return Err(Error::NotHarmonic(gamma0_residual));
    }
    let n = step_count(t_end, dt)?;
    let h = t_end / n as f64;
    let every = sample_every.max(1);

    let star_gamma = ops.star1(&projected)?;
    let weights: Vec<Cochain> = basis
        .forms
        .iter()
        .map(|hk| ops.pointwise_inner(&star_gamma, hk))
        .collect::<Result<_>>()?;
    let area = ops.total_area();
    let w_norm = ops.norm(omega0)?;
    let bound_slopes: Vec<f64> = weights
        .iter()
        .map(|p| Ok(w_norm * ops.norm(p)?))
        .collect::<Result<_>>()?;
    let star_rms = (ops.inner(&star_gamma, &star_gamma)? / area).sqrt();
    let constancy: Vec<f64> = weights
        .iter()
        .zip(&basis.forms)
        .map(|(p, hk)| {
            let h_rms = (ops.inner(hk, hk)? / area).sqrt();
            variation(ops, p, star_rms * h_rms)
        })
        .collect::<Result<_>>()?;
    let c_rate = |w: &Cochain| -> Result<Vec<f64>> {
        weights.iter().map(|p| Ok(-ops.inner(w, p)?)).collect()
    };

    let mut report = Thm1Report {
        times: Vec::new(),
        enstrophy: Vec::new(),
        stream: Vec::new(),
        c: Vec::new(),
        bound_slopes,
        constancy,
        gamma0_residual,
        omega: Vec::new(),
    };
    let mut record = |t: f64, w: &Cochain, c: &[f64]| -> Result<()> {
        let psi = poisson_solve(ops, w)?;
        report.times.push(t);
        report.enstrophy.push(ops.inner(w, w)?);
        report.stream.push(ops.inner(&psi, &psi)?);
        report.c.push(c.to_vec());
        report.omega.push(w.clone());
        Ok(())
    };

    let mut w = omega0.clone();
    let mut c = vec![0.0; basis.dim()];
    let mut rate = c_rate(&w)?;
    record(0.0, &w, &c)?;
    for step in 1..=n {
        let k1 = transport(ops, &star_gamma, &w)?;
        let k2 = transport(ops, &star_gamma, &(&w + &k1.scaled(0.5 * h)))?;
        let k3 = transport(ops, &star_gamma, &(&w + &k2.scaled(0.5 * h)))?;
        let k4 = transport(ops, &star_gamma, &(&w + &k3.scaled(h)))?;
        for (s, k) in [(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)] {
            w.axpy(s * h / 6.0, k);
        }
        ops.remove_mean(w.values_mut());
        let t = step as f64 * h;
        if !w.values().iter().all(|x| x.abs() <= BLOW_UP_LIMIT) {
            return Err(Error::BlowUp(t));
        }
        let next = c_rate(&w)?;
        c.iter_mut()
            .zip(rate.iter().zip(&next))
            .for_each(|(ci, (a, b))| *ci += 0.5 * h * (a + b));
        rate = next;
        if step % every == 0 || step == n {
            record(t, &w, &c)?;
        }
    }
    Ok(report)
}

/// True iff the enstrophy deviates from its initial value by at most `tol` relative.
pub fn enstrophy_conservation_check(report: &Thm1Report, tol: f64) -> bool {
    report.enstrophy_drift() <= tol
}

/// True iff `|c_k(t) − c_k(0)| ≤ (1 + tol) B_k t` for every sample and `k`.
pub fn linear_growth_check(report: &Thm1Report, tol: f64) -> bool {
    report.growth_ratio() <= 1.0 + tol
}

/// True iff `⟨ψ̃,ψ̃⟩ ≤ (1 + tol) ⟨ω̃,ω̃⟩ / λ_min²` at every sample.
pub fn stream_bound_check(report: &Thm1Report, spectral: &SpectralReport, tol: f64) -> bool {
    report
        .stream
        .iter()
        .zip(report.stream_bound(spectral))
        .all(|(s, b)| *s <= (1.0 + tol) * b)
}

/// `A_ij = ∫ ω₀ h^i ∧ h^j`; skew-symmetric bit for bit.
pub fn harmonic_perturbation_matrix(
    ops: &OperatorSet,
    basis: &HarmonicBasis,
    omega0: &Cochain,
) -> Result<DMatrix<f64>> {
    check_zero_mean(ops, omega0)?;
    let k = basis.dim();
    let mut a = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            a[(i, j)] = ops.triple(omega0, &basis.forms[i], &basis.forms[j])?;
        }
    }
    Ok(a)
}

/// `max |A + Aᵀ|`
pub fn skew_defect(a: &DMatrix<f64>) -> f64 {
    (a + a.transpose()).amax()
}

/// Samples of `c(t)` under `ċ = A c`.
#[derive(Clone, Debug, Serialize)]
pub struct HarmonicSeries {
    pub times: Vec<f64>,
    pub c: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
}

impl HarmonicSeries {
    /// `max_t ||c(t)| − |c₀|| / |c₀|`
    pub fn norm_drift(&self) -> f64 {
        let n0 = self.norms.first().copied().unwrap_or(0.0);
        let dev = self
            .norms
            .iter()
            .map(|n| (n - n0).abs())
            .fold(0.0, f64::max);
        if n0 > 0.0 {
            dev / n0
        } else {
            dev
        }
    }
}

/// Evolves `ċ = A c` over `[0, t_end]` with `n_steps` Cayley steps
/// `c ← (I − h/2 A)⁻¹ (I + h/2 A) c`.
pub fn evolve_harmonic_perturbation(
    a: &DMatrix<f64>,
    c0: &[f64],
    t_end: f64,
    n_steps: usize,
) -> Result<HarmonicSeries> {
    if !a.is_square() || a.nrows() != c0.len() {
        return Err(Error::InvalidArgument(
            "A must be square and match c0".into(),
        ));
    }
    let defect = skew_defect(a);
    if defect > 1e-12 {
        return Err(Error::NotSkew(defect));
    }
    if n_steps == 0 || !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument("need n_steps >= 1 and T > 0".into()));
    }
    let h = t_end / n_steps as f64;
    let id = DMatrix::<f64>::identity(a.nrows(), a.ncols());
    let lhs = &id - a * (0.5 * h);
    let rhs = &id + a * (0.5 * h);
    let q = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Solver("Cayley system is singular".into()))?;

    let mut c = DVector::from_column_slice(c0);
    let mut series = HarmonicSeries {
        times: vec![0.0],
        c: vec![c0.to_vec()],
        norms: vec![c.norm()],
    };
    for step in 1..=n_steps {
        c = &q * &c;
        series.times.push(step as f64 * h);
        series.c.push(c.iter().copied().collect());
        series.norms.push(c.norm());
    }
    Ok(series)
}

/// Summary of one harmonic perturbation run.
#[derive(Clone, Debug, Serialize)]
pub struct Thm2Report {
    pub a: Vec<Vec<f64>>,
    pub skew_defect: f64,
    pub series: HarmonicSeries,
    pub norm_drift: f64,
}

/// Builds `A` from `omega0` and evolves `c0` over `[0, t_end]`.
pub fn run_thm2(
    ops: &OperatorSet,
    basis: &HarmonicBasis,
    omega0: &Cochain,
    c0: &[f64],
    t_end: f64,
    n_steps: usize,
) -> Result<Thm2Report> {
    let a = harmonic_perturbation_matrix(ops, basis, omega0)?;
    let series = evolve_harmonic_perturbation(&a, c0, t_end, n_steps)?;
    Ok(Thm2Report {
        a: a.row_iter().map(|r| r.iter().copied().collect()).collect(),
        skew_defect: skew_defect(&a),
        norm_drift: series.norm_drift(),
        series,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::dec::fields;
    use crate::hodge::{harmonic_basis, lambda_min};
    use crate::mesh::generate_flat_torus;

    fn setup(n: usize) -> (OperatorSet, HarmonicBasis) {
        let ops =
            OperatorSet::assemble(&generate_flat_torus(n, n, 2.0 * PI, 2.0 * PI).unwrap()).unwrap();
        let basis = harmonic_basis(&ops, 1, 1e-8).unwrap();
        (ops, basis)
    }

    #[test]
    fn zero_perturbation_gives_zero_series() {
        let (ops, basis) = setup(8);
        let zero = Cochain::zeros(0, ops.n_vertices());
        let r = linearize_thm1(&ops, &basis, &basis.forms[0], &zero, 0.5, 0.1, 1).unwrap();
        assert!(r.enstrophy.iter().chain(&r.stream).all(|x| *x == 0.0));
        assert!(r.c.iter().flatten().all(|x| *x == 0.0));
        assert!(enstrophy_conservation_check(&r, 0.0));
        assert!(linear_growth_check(&r, 0.0));
    }

    #[test]
    fn x_independent_field_is_steady_under_x_flow() {
        let (ops, basis) = setup(16);
        let w0 = fields::sample_function(ops.mesh(), |p| p[1].cos());
        let r = linearize_thm1(&ops, &basis, &basis.forms[0], &w0, 1.0, 0.01, 10).unwrap();
        assert!(r.enstrophy_drift() < 1e-10, "{}", r.enstrophy_drift());
        for w in &r.omega {
            assert!((w - &w0).max_abs() < 1e-10);
        }
        // (⋆dx, dx) vanishes and (⋆dx, dy) is constant on the flat torus
        assert!(r.constancy.iter().all(|v| *v <= 0.02), "{:?}", r.constancy);
    }

    #[test]
    fn corrupted_series_fail_the_checks() {
        let (ops, basis) = setup(16);
        let mut w0 = fields::random_function(ops.mesh(), 4);
        ops.remove_mean(w0.values_mut());
        let mut r = linearize_thm1(&ops, &basis, &basis.forms[0], &w0, 0.1, 0.01, 1).unwrap();
        assert!(enstrophy_conservation_check(&r, 1e-3));
        let n = r.enstrophy.len();
        r.enstrophy[n / 2..].iter_mut().for_each(|z| *z *= 2.0);
        assert!(!enstrophy_conservation_check(&r, 1e-3));
    }

    #[test]
    fn stream_bound_saturates_on_eigenfunction() {
        let (ops, basis) = setup(16);
        let spec = lambda_min(&ops).unwrap();
        let mut r = linearize_thm1(
            &ops,
            &basis,
            &basis.forms[0],
            &spec.eigenfunction,
            0.1,
            0.01,
            1,
        )
        .unwrap();
        assert!(stream_bound_check(&r, &spec, 1e-9));
        let ratio = r.stream[0] / r.stream_bound(&spec)[0];
        assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
        r.stream.iter_mut().for_each(|s| *s *= 4.0);
        assert!(!stream_bound_check(&r, &spec, 0.05));
    }

    #[test]
    fn non_harmonic_gamma_is_rejected() {
        let (ops, basis) = setup(8);
        let g = fields::random_one_form(ops.mesh(), 1);
        let zero = Cochain::zeros(0, ops.n_vertices());
        assert!(matches!(
            linearize_thm1(&ops, &basis, &g, &zero, 0.1, 0.01, 1),
            Err(Error::NotHarmonic(_))
        ));
    }

    #[test]
    fn flat_torus_matrix_vanishes() {
        let (ops, basis) = setup(16);
        let mut w = fields::random_function(ops.mesh(), 3);
        ops.remove_mean(w.values_mut());
        let a = harmonic_perturbation_matrix(&ops, &basis, &w).unwrap();
        assert_eq!(skew_defect(&a), 0.0);
        assert!(a.amax() < 1e-8, "{}", a.amax());
        let zero = Cochain::zeros(0, ops.n_vertices());
        assert_eq!(
            harmonic_perturbation_matrix(&ops, &basis, &zero)
                .unwrap()
                .amax(),
            0.0
        );
    }

    #[test]
    fn cayley_rotation_matches_closed_form() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.7, -0.7, 0.0]);
        let s = evolve_harmonic_perturbation(&a, &[1.0, 0.0], 1.0, 20000).unwrap();
        let c = s.c.last().unwrap();
        assert!((c[0] - 0.7f64.cos()).abs() < 1e-9 && (c[1] + 0.7f64.sin()).abs() < 1e-9);
        assert!(s.norm_drift() <= 1e-12);
        let zero = DMatrix::zeros(2, 2);
        let s = evolve_harmonic_perturbation(&zero, &[0.3, 0.4], 5.0, 10).unwrap();
        assert!(s.c.iter().all(|c| c == &vec![0.3, 0.4]));
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            evolve_harmonic_perturbation(&bad, &[1.0, 0.0], 1.0, 10),
            Err(Error::NotSkew(_))
        ));
    }
}
