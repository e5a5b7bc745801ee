//! Incompressible Euler flow in vorticity / harmonic-coefficient variables.
//!
//! The state is `(ω, c)`; the velocity is always reconstructed as
//! `v♭ = ⋆dψ + Σ c_i h^i` with `−δdψ = ω`, so incompressibility and the
//! Hodge split hold by construction. The momentum equation
//! `∂v♭ = F − ω ⋆v♭ − dp` is split into its curl (evolving `ω`), its
//! harmonic projection (evolving `c`) and its divergence (the pressure).

use serde::Serialize;

use crate::dec::{Cochain, OperatorSet};
use crate::error::{Error, Result};
use crate::hodge::{check_zero_mean, poisson_solve, HarmonicBasis};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowState {
    pub t: f64,
    pub omega: Cochain,
    pub c: Vec<f64>,
}

impl FlowState {
    /// Validated state at time `t`.
    pub fn new(
        ops: &OperatorSet,
        basis: &HarmonicBasis,
        t: f64,
        omega: Cochain,
        c: Vec<f64>,
    ) -> Result<Self> {
        check_zero_mean(ops, &omega)?;
        if c.len() != basis.dim() {
            return Err(Error::LengthMismatch {
                expected: basis.dim(),
                found: c.len(),
            });
        }
        Ok(Self { t, omega, c })
    }

    /// Resting fluid.
    pub fn zero(ops: &OperatorSet, basis: &HarmonicBasis) -> Self {
        Self {
            t: 0.0,
            omega: Cochain::zeros(0, ops.n_vertices()),
            c: vec![0.0; basis.dim()],
        }
    }

    /// False once any value is non-finite or exceeds [`BLOW_UP_LIMIT`].
    fn is_bounded(&self) -> bool {
        self.omega
            .values()
            .iter()
            .chain(&self.c)
            .all(|x| x.abs() <= BLOW_UP_LIMIT)
    }
}

/// Magnitude beyond which a state counts as blown up; quadratic diagnostics
/// overflow well before values become infinite.
pub const BLOW_UP_LIMIT: f64 = 1e100;

/// Constant-in-time body force, with its curl and harmonic coefficients cached.
#[derive(Clone, Debug)]
pub struct Forcing {
    pub flat: Cochain,
    curl: Cochain,
    harmonic: Vec<f64>,
}

impl Forcing {
    pub fn new(ops: &OperatorSet, basis: &HarmonicBasis, flat: Cochain) -> Result<Self> {
        let curl = ops.star2(&ops.d(&flat)?)?;
        let harmonic = basis.coefficients(ops, &flat)?;
        Ok(Self {
            flat,
            curl,
            harmonic,
        })
    }
}

/// `v♭ = ⋆d ψ(ω) + Σ c_i h^i`.
pub fn reconstruct_velocity(
    state: &FlowState,
    ops: &OperatorSet,
    basis: &HarmonicBasis,
) -> Result<Cochain> {
    let psi = poisson_solve(ops, &state.omega)?;
    let mut v = ops.star1(&ops.d(&psi)?)?;
    v.axpy(1.0, &basis.combine(&state.c)?);
    Ok(v)
}

/// Time derivatives `(ω̇, ċ)` of the state.
pub fn rhs(
    state: &FlowState,
    forcing: Option<&Forcing>,
    ops: &OperatorSet,
    basis: &HarmonicBasis,
) -> Result<(Cochain, Vec<f64>)> {
    let v = reconstruct_velocity(state, ops, basis)?;
    let q = ops.wedge01(&state.omega, &ops.star1(&v)?)?;
    let mut omega_dot = ops.star2(&ops.d(&q)?)?.scaled(-1.0);
    let mut c_dot: Vec<f64> = basis
        .coefficients(ops, &q)?
        .into_iter()
        .map(|x| -x)
        .collect();
    if let Some(f) = forcing {
        omega_dot.axpy(1.0, &f.curl);
        c_dot.iter_mut().zip(&f.harmonic).for_each(|(c, h)| *c += h);
    }
    Ok((omega_dot, c_dot))
}

fn combine(state: &FlowState, h: f64, k: &(Cochain, Vec<f64>)) -> FlowState {
    let mut omega = state.omega.clone();
    omega.axpy(h, &k.0);
    let c = state.c.iter().zip(&k.1).map(|(c, d)| c + h * d).collect();
    FlowState {
        t: state.t + h,
        omega,
        c,
    }
}

/// One classical Runge–Kutta step; the mean of `ω` is projected out afterwards.
pub fn step_rk4(
    state: &FlowState,
    dt: f64,
    forcing: Option<&Forcing>,
    ops: &OperatorSet,
    basis: &HarmonicBasis,
) -> Result<FlowState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let blow_up = |s: &FlowState| {
        if s.is_bounded() {
            Ok(())
        } else {
            Err(Error::BlowUp(state.t))
        }
    };
    let k1 = rhs(state, forcing, ops, basis)?;
    let s2 = combine(state, 0.5 * dt, &k1);
    blow_up(&s2)?;
    let k2 = rhs(&s2, forcing, ops, basis)?;
    let s3 = combine(state, 0.5 * dt, &k2);
    blow_up(&s3)?;
    let k3 = rhs(&s3, forcing, ops, basis)?;
    let s4 = combine(state, dt, &k3);
    blow_up(&s4)?;
    let k4 = rhs(&s4, forcing, ops, basis)?;

    let mut omega = state.omega.clone();
    let mut c = state.c.clone();
    for (w, k) in [(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)] {
        omega.axpy(w * dt / 6.0, &k.0);
        c.iter_mut()
            .zip(&k.1)
            .for_each(|(ci, d)| *ci += w * dt / 6.0 * d);
    }
    ops.remove_mean(omega.values_mut());
    let next = FlowState {
        t: state.t + dt,
        omega,
        c,
    };
    if !next.is_bounded() {
        return Err(Error::BlowUp(next.t));
    }
    Ok(next)
}

/// Conservation diagnostics of one sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    /// `½⟨v♭, v♭⟩`
    pub energy: f64,
    /// `½⟨ω, ω⟩`
    pub enstrophy: f64,
    /// `∫ ω μ`
    pub total_vorticity: f64,
    pub c: Vec<f64>,
    pub c_norm: f64,
}

pub fn diagnostics(
    state: &FlowState,
    ops: &OperatorSet,
    basis: &HarmonicBasis,
) -> Result<Diagnostics> {
    let v = reconstruct_velocity(state, ops, basis)?;
    Ok(Diagnostics {
        t: state.t,
        energy: 0.5 * ops.inner(&v, &v)?,
        enstrophy: 0.5 * ops.inner(&state.omega, &state.omega)?,
        total_vorticity: ops.integral0(state.omega.values()),
        c: state.c.clone(),
        c_norm: state.c.iter().map(|x| x * x).sum::<f64>().sqrt(),
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Trajectory {
    pub diagnostics: Vec<Diagnostics>,
    #[serde(skip)]
    pub states: Vec<FlowState>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.t).collect()
    }

    pub fn last(&self) -> Option<&FlowState> {
        self.states.last()
    }

    /// `max_t |q(t) − q(0)| / |q(0)|` for a diagnostic selected by `f`.
    pub fn relative_drift(&self, f: impl Fn(&Diagnostics) -> f64) -> f64 {
        let Some(first) = self.diagnostics.first() else {
            return 0.0;
        };
        let q0 = f(first);
        let dev = self
            .diagnostics
            .iter()
            .map(|d| (f(d) - q0).abs())
            .fold(0.0, f64::max);
        if q0 == 0.0 {
            dev
        } else {
            dev / q0.abs()
        }
    }
}

/// Number of steps of size close to `dt` that exactly cover `[0, t_end]`.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(t_end > 0.0 && t_end.is_finite()) || !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need T > 0 and dt > 0, got T = {t_end}, dt = {dt}"
        )));
    }
    Ok(((t_end / dt).round() as usize).max(1))
}

/// Integrates to `t_end` with RK4, sampling every `sample_every` steps and at the end.
pub fn integrate(
    initial: &FlowState,
    t_end: f64,
    dt: f64,
    sample_every: usize,
    forcing: Option<&Forcing>,
    ops: &OperatorSet,
    basis: &HarmonicBasis,
) -> Result<Trajectory> {
    let n = step_count(t_end, dt)?;
    let h = t_end / n as f64;
    let every = sample_every.max(1);
    let mut traj = Trajectory::default();
    let mut state = initial.clone();
    let t0 = state.t;
    traj.diagnostics.push(diagnostics(&state, ops, basis)?);
    traj.states.push(state.clone());
    for step in 1..=n {
        state = step_rk4(&state, h, forcing, ops, basis)?;
        // avoid accumulating round-off in the clock
        state.t = t0 + step as f64 * h;
        if step % every == 0 || step == n {
            traj.diagnostics.push(diagnostics(&state, ops, basis)?);
            traj.states.push(state.clone());
        }
    }
    Ok(traj)
}

/// Mean-free Bernoulli pressure from `δdp = δ(F♭ − ω ⋆v♭)`.
pub fn recover_pressure(
    state: &FlowState,
    forcing: Option<&Forcing>,
    ops: &OperatorSet,
    basis: &HarmonicBasis,
) -> Result<Cochain> {
    let v = reconstruct_velocity(state, ops, basis)?;
    let mut m = ops.wedge01(&state.omega, &ops.star1(&v)?)?.scaled(-1.0);
    if let Some(f) = forcing {
        m.axpy(1.0, &f.flat);
    }
    // M0 δ = d0ᵀ M1, so the pressure solves K p = d0ᵀ M1 m
    let rhs = ops.d0().tmatvec(&ops.m1().matvec(m.values()));
    let rhs = crate::hodge::sum_free(rhs);
    let mut p = ops.solve_stiffness_pinned(&rhs);
    ops.remove_mean(&mut p);
    Ok(Cochain::new(0, p))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::dec::fields;
    use crate::hodge::harmonic_basis;
    use crate::mesh::generate_flat_torus;

    fn setup(n: usize) -> (OperatorSet, HarmonicBasis) {
        let ops =
            OperatorSet::assemble(&generate_flat_torus(n, n, 2.0 * PI, 2.0 * PI).unwrap()).unwrap();
        let basis = harmonic_basis(&ops, 1, 1e-8).unwrap();
        (ops, basis)
    }

    fn rel(ops: &OperatorSet, a: &Cochain, b: &Cochain) -> f64 {
        ops.norm(&(a - b)).unwrap() / ops.norm(b).unwrap()
    }

    #[test]
    fn harmonic_states_are_fixed_points() {
        let (ops, basis) = setup(8);
        let s = FlowState::new(
            &ops,
            &basis,
            0.0,
            Cochain::zeros(0, ops.n_vertices()),
            vec![0.3, -1.2],
        )
        .unwrap();
        let (w, c) = rhs(&s, None, &ops, &basis).unwrap();
        assert_eq!(w.max_abs(), 0.0);
        assert!(c.iter().all(|x| *x == 0.0));
        let next = step_rk4(&s, 0.1, None, &ops, &basis).unwrap();
        assert_eq!(next.c, s.c);
        assert_eq!(next.omega.max_abs(), 0.0);
        let zero = FlowState::zero(&ops, &basis);
        let v = reconstruct_velocity(&zero, &ops, &basis).unwrap();
        assert_eq!(v.max_abs(), 0.0);
    }

    #[test]
    fn shear_velocity_and_pressure() {
        let (ops, basis) = setup(32);
        let mesh = ops.mesh();
        let w = fields::sample_function(mesh, |p| p[0].cos());
        let s = FlowState::new(&ops, &basis, 0.0, w, vec![0.0, 0.0]).unwrap();
        let v = reconstruct_velocity(&s, &ops, &basis).unwrap();
        // ω = cos x gives ψ = −cos x and v♭ = ⋆d(−cos x) = sin x dy
        let exact = fields::integrate_one_form(mesh, |p| [0.0, p[0].sin(), 0.0]);
        assert!(rel(&ops, &v, &exact) < 0.03);
        let p = recover_pressure(&s, None, &ops, &basis).unwrap();
        let pe = fields::sample_function(mesh, |p| -0.25 * (2.0 * p[0]).cos());
        assert!(rel(&ops, &p, &pe) < 0.03, "{}", rel(&ops, &p, &pe));
        let (wd, _) = rhs(&s, None, &ops, &basis).unwrap();
        assert!(ops.norm(&wd).unwrap() / ops.norm(&s.omega).unwrap() < 0.02);
    }

    #[test]
    fn gradient_forcing_goes_into_pressure() {
        let (ops, basis) = setup(16);
        let phi = fields::sample_function(ops.mesh(), |p| (p[0] + p[1]).sin() + 0.3 * p[1].cos());
        let f = Forcing::new(&ops, &basis, ops.d(&phi).unwrap()).unwrap();
        let rest = FlowState::zero(&ops, &basis);
        let p = recover_pressure(&rest, Some(&f), &ops, &basis).unwrap();
        let mut expect = phi.clone();
        ops.remove_mean(expect.values_mut());
        assert!((&p - &expect).max_abs() < 1e-8);
    }

    #[test]
    fn advection_by_constant_flow() {
        let (ops, basis) = setup(32);
        let w = fields::sample_function(ops.mesh(), |p| p[0].cos());
        // γ = u dx with u = 1
        let u = ops.norm(&fields::flat_dx(ops.mesh()).unwrap()).unwrap();
        let s = FlowState::new(&ops, &basis, 0.0, w, vec![u, 0.0]).unwrap();
        let (wd, cd) = rhs(&s, None, &ops, &basis).unwrap();
        let exact = fields::sample_function(ops.mesh(), |p| p[0].sin());
        assert!(rel(&ops, &wd, &exact) < 0.03, "{}", rel(&ops, &wd, &exact));
        assert!(cd.iter().all(|x| x.abs() < 1e-8));
    }

    #[test]
    fn nonzero_mean_state_is_rejected() {
        let (ops, basis) = setup(8);
        let one = Cochain::new(0, vec![1.0; ops.n_vertices()]);
        assert!(FlowState::new(&ops, &basis, 0.0, one, vec![0.0; 2]).is_err());
        let s = FlowState::zero(&ops, &basis);
        assert!(step_rk4(&s, 0.0, None, &ops, &basis).is_err());
    }

    #[test]
    fn integrate_is_deterministic_and_conserves_total_vorticity() {
        let (ops, basis) = setup(12);
        let mut w = fields::random_function(ops.mesh(), 9);
        ops.remove_mean(w.values_mut());
        let s = FlowState::new(&ops, &basis, 0.0, w, vec![0.5, 0.2]).unwrap();
        let a = integrate(&s, 0.05, 0.01, 2, None, &ops, &basis).unwrap();
        let b = integrate(&s, 0.05, 0.01, 2, None, &ops, &basis).unwrap();
        assert_eq!(a.diagnostics, b.diagnostics);
        assert_eq!(a.times(), vec![0.0, 0.02, 0.04, 0.05]);
        assert!(a
            .diagnostics
            .iter()
            .all(|d| d.total_vorticity.abs() < 1e-12));
    }
}
