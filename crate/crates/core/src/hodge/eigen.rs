//! Block shift-invert subspace iteration for the low end of a symmetric
//! generalized eigenproblem `A x = θ B x`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{axpy, dot, norm2};

/// In-place projection onto an admissible subspace.
pub(crate) type Projection<'a> = &'a dyn Fn(&mut [f64]);

/// Operator callbacks of one eigenproblem. `shift_solve` applies
/// `(A − σB)⁻¹` to a vector that is already of the form `B x`.
pub(crate) struct Problem<'a> {
    pub n: usize,
    pub apply_a: &'a dyn Fn(&[f64]) -> Vec<f64>,
    pub apply_b: &'a dyn Fn(&[f64]) -> Vec<f64>,
    pub shift_solve: &'a dyn Fn(&[f64]) -> Vec<f64>,
    /// projection onto the admissible subspace (deflation), applied after every solve
    pub project: Option<Projection<'a>>,
    /// dimension removed by `project`
    pub deflated: usize,
}

pub(crate) struct Settings {
    /// number of leading eigenpairs whose residuals must converge
    pub converge: usize,
    pub block: usize,
    pub max_iter: usize,
    pub min_iter: usize,
    /// target: `‖A x − θ B x‖ / ‖B x‖ ≤ tol · |θ_scale|`
    pub tol: f64,
    /// residual level accepted when `max_iter` is exhausted before `tol` is met
    pub accept_tol: f64,
    /// index of the Ritz value that sets the residual scale
    pub scale_index: usize,
    pub seed: u64,
}

pub(crate) struct Eigenpairs {
    pub values: Vec<f64>,
    /// B-orthonormal Ritz vectors
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// B-orthonormalizes `vs` in place by modified Gram–Schmidt with one
/// reorthogonalization pass. Collapsed columns are replaced with random ones.
pub(crate) fn b_orthonormalize(
    vs: &mut [Vec<f64>],
    apply_b: &dyn Fn(&[f64]) -> Vec<f64>,
    project: Option<Projection>,
    rng: &mut ChaCha8Rng,
) {
    let mut bq: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for j in 0..vs.len() {
        loop {
            let before = dot(&vs[j], &apply_b(&vs[j])).max(0.0).sqrt();
            for _ in 0..2 {
                for (i, bqi) in bq.iter().enumerate() {
                    let c = dot(bqi, &vs[j]);
                    let (head, tail) = vs.split_at_mut(j);
                    axpy(-c, &head[i], &mut tail[0]);
                }
            }
            let bv = apply_b(&vs[j]);
            let nrm = dot(&vs[j], &bv).max(0.0).sqrt();
            if nrm > 1e-10 * before && nrm > 0.0 {
                vs[j].iter_mut().for_each(|x| *x /= nrm);
                bq.push(bv.into_iter().map(|x| x / nrm).collect());
                break;
            }
            vs[j] = (0..vs[j].len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if let Some(p) = project {
                p(&mut vs[j]);
            }
        }
    }
}

pub(crate) fn lowest(problem: &Problem, settings: &Settings) -> Result<Eigenpairs> {
    let p = settings.block.min(problem.n - problem.deflated);
    if p == 0 || settings.converge > p {
        return Err(Error::InvalidArgument("eigensolver block too small".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            let mut v: Vec<f64> = (0..problem.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if let Some(pr) = problem.project {
                pr(&mut v);
            }
            v
        })
        .collect();
    b_orthonormalize(&mut x, problem.apply_b, problem.project, &mut rng);

    let mut worst = f64::INFINITY;
    for it in 1..=settings.max_iter {
        let mut y: Vec<Vec<f64>> = x
            .iter()
            .map(|xi| {
                let mut v = (problem.shift_solve)(&(problem.apply_b)(xi));
                if let Some(pr) = problem.project {
                    pr(&mut v);
                }
                v
            })
            .collect();
        b_orthonormalize(&mut y, problem.apply_b, problem.project, &mut rng);

        // Rayleigh–Ritz on span(y)
        let ay: Vec<Vec<f64>> = y.iter().map(|v| (problem.apply_a)(v)).collect();
        let mut h = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in 0..=i {
                let v = 0.5 * (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let combine = |basis: &[Vec<f64>], k: usize| {
            let mut out = vec![0.0; problem.n];
            for (i, b) in basis.iter().enumerate() {
                axpy(eig.eigenvectors[(i, k)], b, &mut out);
            }
            out
        };
        x = order.iter().map(|&k| combine(&y, k)).collect();

        let scale = values[settings.scale_index.min(p - 1)].abs();
        let mut residuals = Vec::with_capacity(settings.converge);
        for (i, &k) in order.iter().take(settings.converge).enumerate() {
            let ax = combine(&ay, k);
            let bx = (problem.apply_b)(&x[i]);
            let mut r = ax;
            axpy(-values[i], &bx, &mut r);
            residuals.push(norm2(&r) / norm2(&bx));
        }
        worst = residuals.iter().cloned().fold(0.0, f64::max);
        let done = it >= settings.min_iter && worst <= settings.tol * scale;
        let accept = worst <= settings.accept_tol * scale;
        if done || (it == settings.max_iter && accept) {
            return Ok(Eigenpairs {
                values,
                vectors: x,
                residuals,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: settings.max_iter,
        residual: worst,
    })
}
