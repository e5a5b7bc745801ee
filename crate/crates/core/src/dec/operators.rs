//! Assembly of the Whitney–Galerkin operator set and the cochain operations built on it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::geometry::{rotate, wedge, TriangleFrame, DEGREE2, DEGREE4};
use super::Cochain;
use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;
use crate::sparse::{Cholesky, CsrMatrix};

/// Quadrature used by [`OperatorSet::wedge01`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WedgeRule {
    /// `((f_u + f_v) / 2) · a_e` on every edge
    #[default]
    Midpoint,
    /// M1-projection of the product of the P1 and Whitney interpolants
    Galerkin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorOptions {
    pub wedge_rule: WedgeRule,
    /// relative residual target of iterative linear solves
    pub linear_tol: f64,
    /// harmonic eigen-residual tolerance
    pub harmonic_tol: f64,
    /// triangles with area below this fraction of the mean area are rejected
    pub degenerate_ratio: f64,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        Self {
            wedge_rule: WedgeRule::Midpoint,
            linear_tol: 1e-10,
            harmonic_tol: 1e-8,
            degenerate_ratio: 1e-14,
        }
    }
}

impl OperatorOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("linear_tol", self.linear_tol),
            ("harmonic_tol", self.harmonic_tol),
            ("degenerate_ratio", self.degenerate_ratio),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Sparse operators of one mesh together with cached factorizations of the
/// mass matrices and of the vertex-pinned stiffness matrix.
pub struct OperatorSet {
    mesh: Arc<SurfaceMesh>,
    options: OperatorOptions,
    frames: Vec<TriangleFrame>,
    areas: Vec<f64>,
    d0: CsrMatrix,
    d1: CsrMatrix,
    m0: CsrMatrix,
    m1: CsrMatrix,
    m2: CsrMatrix,
    w1: CsrMatrix,
    /// V×F vertex/triangle averaging matrix, `1/3` on incidences
    avg: CsrMatrix,
    stiffness: CsrMatrix,
    m0_chol: Cholesky,
    m1_chol: Cholesky,
    /// stiffness with vertex 0 removed
    k_chol: Cholesky,
}

impl std::fmt::Debug for OperatorSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorSet")
            .field("vertices", &self.n_vertices())
            .field("edges", &self.n_edges())
            .field("triangles", &self.n_triangles())
            .field("options", &self.options)
            .finish_non_exhaustive()
    }
}

impl OperatorSet {
    pub fn assemble(mesh: &SurfaceMesh) -> Result<Self> {
        Self::assemble_with(mesh, OperatorOptions::default())
    }

    pub fn assemble_with(mesh: &SurfaceMesh, options: OperatorOptions) -> Result<Self> {
        options.validate()?;
        if !mesh.topology().connected {
            return Err(Error::InvalidMesh(
                "operators require a connected surface".into(),
            ));
        }
        let (nv, ne, nf) = (mesh.n_vertices(), mesh.n_edges(), mesh.n_triangles());
        let lengths = mesh.edge_lengths();

        let frames: Vec<TriangleFrame> = mesh
            .triangles()
            .iter()
            .zip(mesh.triangle_edges())
            .map(|(&tri, &le)| TriangleFrame::from_lengths(tri, le, le.map(|l| lengths[l.edge])))
            .collect();
        let areas: Vec<f64> = frames.iter().map(|f| f.area).collect();
        let mean = areas.iter().sum::<f64>() / nf as f64;
        let threshold = options.degenerate_ratio * mean;
        if let Some((t, &a)) = areas
            .iter()
            .enumerate()
            .find(|(_, a)| !(**a >= threshold && a.is_finite()))
        {
            return Err(Error::DegenerateTriangle {
                triangle: t,
                area: a,
                threshold,
            });
        }

        let mut d0 = Vec::with_capacity(2 * ne);
        for (e, &[a, b]) in mesh.edges().iter().enumerate() {
            d0.push((e, a, -1.0));
            d0.push((e, b, 1.0));
        }
        let d0 = CsrMatrix::from_triplets(ne, nv, &d0);

        let mut d1 = Vec::with_capacity(3 * nf);
        let mut m0 = Vec::with_capacity(9 * nf);
        let mut m1 = Vec::with_capacity(9 * nf);
        let mut w1 = Vec::with_capacity(9 * nf);
        let mut avg = Vec::with_capacity(3 * nf);
        for (t, fr) in frames.iter().enumerate() {
            let mut mloc = [[0.0; 3]; 3];
            let mut wloc = [[0.0; 3]; 3];
            for (lam, w) in DEGREE2.points.iter().zip(DEGREE2.weights) {
                let phi = fr.signed_whitney(lam);
                for i in 0..3 {
                    for j in 0..3 {
                        let r = rotate(phi[j]);
                        mloc[i][j] += w * (phi[i][0] * phi[j][0] + phi[i][1] * phi[j][1]);
                        wloc[i][j] += w * (phi[i][0] * r[0] + phi[i][1] * r[1]);
                    }
                }
            }
            for i in 0..3 {
                let ei = fr.edges[i].edge;
                d1.push((t, ei, f64::from(fr.edges[i].sign)));
                avg.push((fr.vertices[i], t, 1.0 / 3.0));
                for j in 0..3 {
                    let ej = fr.edges[j].edge;
                    m1.push((ei, ej, fr.area * mloc[i][j]));
                    // exact skew symmetry at the element level
                    w1.push((ei, ej, fr.area * 0.5 * (wloc[i][j] - wloc[j][i])));
                    let m = if i == j { 2.0 } else { 1.0 };
                    m0.push((fr.vertices[i], fr.vertices[j], fr.area * m / 12.0));
                }
            }
        }
        let d1 = CsrMatrix::from_triplets(nf, ne, &d1);
        let m0 = CsrMatrix::from_triplets(nv, nv, &m0);
        let m1 = CsrMatrix::from_triplets(ne, ne, &m1);
        let w1 = CsrMatrix::from_triplets(ne, ne, &w1);
        let avg = CsrMatrix::from_triplets(nv, nf, &avg);
        let m2 = CsrMatrix::diagonal(&areas.iter().map(|a| 1.0 / a).collect::<Vec<_>>());
        let stiffness = d0.transpose().matmul(&m1.matmul(&d0));

        let m0_chol = Cholesky::new(&m0)?;
        let m1_chol = Cholesky::new(&m1)?;
        let k_chol = Cholesky::new(&stiffness.without_row_col(0))?;

        Ok(Self {
            mesh: Arc::new(mesh.clone()),
            options,
            frames,
            areas,
            d0,
            d1,
            m0,
            m1,
            m2,
            w1,
            avg,
            stiffness,
            m0_chol,
            m1_chol,
            k_chol,
        })
    }

    pub fn mesh(&self) -> &SurfaceMesh {
        &self.mesh
    }

    pub fn options(&self) -> &OperatorOptions {
        &self.options
    }

    pub fn n_vertices(&self) -> usize {
        self.mesh.n_vertices()
    }

    pub fn n_edges(&self) -> usize {
        self.mesh.n_edges()
    }

    pub fn n_triangles(&self) -> usize {
        self.mesh.n_triangles()
    }

    pub fn n_cells(&self, degree: u8) -> usize {
        match degree {
            0 => self.n_vertices(),
            1 => self.n_edges(),
            _ => self.n_triangles(),
        }
    }

    pub fn frames(&self) -> &[TriangleFrame] {
        &self.frames
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn d0(&self) -> &CsrMatrix {
        &self.d0
    }

    pub fn d1(&self) -> &CsrMatrix {
        &self.d1
    }

    pub fn m0(&self) -> &CsrMatrix {
        &self.m0
    }

    pub fn m1(&self) -> &CsrMatrix {
        &self.m1
    }

    pub fn m2(&self) -> &CsrMatrix {
        &self.m2
    }

    pub fn w1(&self) -> &CsrMatrix {
        &self.w1
    }

    /// P1 stiffness matrix `d0ᵀ M1 d0`.
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn mass(&self, degree: u8) -> &CsrMatrix {
        match degree {
            0 => &self.m0,
            1 => &self.m1,
            _ => &self.m2,
        }
    }

    pub(crate) fn solve_m0(&self, rhs: &[f64]) -> Vec<f64> {
        self.m0_chol.solve(rhs)
    }

    pub(crate) fn solve_m1(&self, rhs: &[f64]) -> Vec<f64> {
        self.m1_chol.solve(rhs)
    }

    /// Solves `K x = rhs` with `x[0] = 0`; `rhs` must sum to zero.
    pub(crate) fn solve_stiffness_pinned(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; rhs.len()];
        x[1..].copy_from_slice(&self.k_chol.solve(&rhs[1..]));
        x
    }

    /// Removes the M0-weighted mean of a 0-cochain in place.
    pub fn remove_mean(&self, values: &mut [f64]) {
        let mean = self.integral0(values) / self.total_area();
        values.iter_mut().for_each(|v| *v -= mean);
    }

    /// `∫ f μ` for the P1 interpolant of a 0-cochain.
    pub fn integral0(&self, values: &[f64]) -> f64 {
        // 1ᵀ M0 f equals Σ_t area_t · mean of f over t
        self.frames
            .iter()
            .map(|fr| fr.area * fr.vertices.iter().map(|&v| values[v]).sum::<f64>() / 3.0)
            .sum()
    }

    fn check(&self, c: &Cochain, degree: u8) -> Result<()> {
        c.expect_degree(degree)?;
        c.expect_len(self.n_cells(degree))
    }

    /// Coboundary `d` on 0- and 1-cochains.
    pub fn d(&self, c: &Cochain) -> Result<Cochain> {
        match c.degree() {
            0 => {
                self.check(c, 0)?;
                Ok(Cochain::new(1, self.d0.matvec(c.values())))
            }
            1 => {
                self.check(c, 1)?;
                Ok(Cochain::new(2, self.d1.matvec(c.values())))
            }
            k => Err(Error::InvalidArgument(format!(
                "d is undefined on {k}-cochains"
            ))),
        }
    }

    /// Hodge inner product `aᵀ M_k b`.
    pub fn inner(&self, a: &Cochain, b: &Cochain) -> Result<f64> {
        b.expect_degree(a.degree())?;
        self.check(a, a.degree())?;
        self.check(b, a.degree())?;
        let mb = self.mass(a.degree()).matvec(b.values());
        Ok(crate::sparse::dot(a.values(), &mb))
    }

    pub fn norm(&self, a: &Cochain) -> Result<f64> {
        Ok(self.inner(a, a)?.max(0.0).sqrt())
    }

    /// Codifferential defined as the mass-adjoint of `d`: `δ = M_{k-1}⁻¹ dᵀ M_k`.
    pub fn delta(&self, c: &Cochain) -> Result<Cochain> {
        match c.degree() {
            1 => {
                self.check(c, 1)?;
                let r = self.d0.tmatvec(&self.m1.matvec(c.values()));
                Ok(Cochain::new(0, self.solve_m0(&r)))
            }
            2 => {
                self.check(c, 2)?;
                let r = self.d1.tmatvec(&self.m2.matvec(c.values()));
                Ok(Cochain::new(1, self.solve_m1(&r)))
            }
            k => Err(Error::InvalidArgument(format!(
                "delta is undefined on {k}-cochains"
            ))),
        }
    }

    /// Galerkin Hodge star on 1-cochains: `M1 ⋆a = W1 a`.
    pub fn star1(&self, a: &Cochain) -> Result<Cochain> {
        self.check(a, 1)?;
        let x = self.solve_m1(&self.w1.matvec(a.values()));
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver(
                "mass matrix solve produced non-finite values".into(),
            ));
        }
        Ok(Cochain::new(1, x))
    }

    /// Hodge star of a 2-cochain into a 0-cochain (L²-projection of `η/μ` onto P1).
    pub fn star2(&self, eta: &Cochain) -> Result<Cochain> {
        self.check(eta, 2)?;
        Ok(Cochain::new(
            0,
            self.solve_m0(&self.avg.matvec(eta.values())),
        ))
    }

    /// Hodge star of a 0-cochain into a 2-cochain: `∫_t f μ`.
    pub fn star0(&self, f: &Cochain) -> Result<Cochain> {
        self.check(f, 0)?;
        let v = f.values();
        Ok(Cochain::new(
            2,
            self.frames
                .iter()
                .map(|fr| fr.area * fr.vertices.iter().map(|&i| v[i]).sum::<f64>() / 3.0)
                .collect(),
        ))
    }

    /// Laplacian `δd` on 0-cochains.
    pub fn laplacian0(&self, f: &Cochain) -> Result<Cochain> {
        self.check(f, 0)?;
        Ok(Cochain::new(
            0,
            self.solve_m0(&self.stiffness.matvec(f.values())),
        ))
    }

    /// Product of a 0-form and a 1-form, using the configured [`WedgeRule`].
    pub fn wedge01(&self, f: &Cochain, a: &Cochain) -> Result<Cochain> {
        self.wedge01_with(self.options.wedge_rule, f, a)
    }

    pub fn wedge01_with(&self, rule: WedgeRule, f: &Cochain, a: &Cochain) -> Result<Cochain> {
        self.check(f, 0)?;
        self.check(a, 1)?;
        let (fv, av) = (f.values(), a.values());
        match rule {
            WedgeRule::Midpoint => Ok(Cochain::new(
                1,
                self.mesh
                    .edges()
                    .iter()
                    .zip(av)
                    .map(|(&[u, v], x)| 0.5 * (fv[u] + fv[v]) * x)
                    .collect(),
            )),
            WedgeRule::Galerkin => {
                let mut rhs = vec![0.0; self.n_edges()];
                for fr in &self.frames {
                    let mut loc = [0.0; 3];
                    for (lam, w) in DEGREE4.points.iter().zip(DEGREE4.weights) {
                        let phi = fr.signed_whitney(lam);
                        let wa = fr.interpolate(av, lam);
                        let fq = fr.interpolate0(fv, lam);
                        for (l, p) in loc.iter_mut().zip(&phi) {
                            *l += w * fq * (p[0] * wa[0] + p[1] * wa[1]);
                        }
                    }
                    for (le, l) in fr.edges.iter().zip(loc) {
                        rhs[le.edge] += fr.area * l;
                    }
                }
                Ok(Cochain::new(1, self.solve_m1(&rhs)))
            }
        }
    }

    /// `∫ f · (a ∧ b)` with the P1 interpolant of `f` and Whitney interpolants of `a`, `b`.
    /// Antisymmetric in `(a, b)` bit for bit.
    pub fn triple(&self, f: &Cochain, a: &Cochain, b: &Cochain) -> Result<f64> {
        self.check(f, 0)?;
        self.check(a, 1)?;
        self.check(b, 1)?;
        let ab = self.triple_raw(f.values(), a.values(), b.values());
        let ba = self.triple_raw(f.values(), b.values(), a.values());
        Ok(0.5 * (ab - ba))
    }

    fn triple_raw(&self, f: &[f64], a: &[f64], b: &[f64]) -> f64 {
        let mut total = 0.0;
        for fr in &self.frames {
            let mut s = 0.0;
            for (lam, w) in DEGREE4.points.iter().zip(DEGREE4.weights) {
                s += w
                    * fr.interpolate0(f, lam)
                    * wedge(fr.interpolate(a, lam), fr.interpolate(b, lam));
            }
            total += fr.area * s;
        }
        total
    }

    /// Vertex field of the pointwise inner product of two Whitney interpolants,
    /// averaged over each vertex star with area weights.
    pub fn pointwise_inner(&self, a: &Cochain, b: &Cochain) -> Result<Cochain> {
        self.check(a, 1)?;
        self.check(b, 1)?;
        let mut num = vec![0.0; self.n_vertices()];
        let mut den = vec![0.0; self.n_vertices()];
        for fr in &self.frames {
            let mut s = 0.0;
            for (lam, w) in DEGREE2.points.iter().zip(DEGREE2.weights) {
                let (x, y) = (
                    fr.interpolate(a.values(), lam),
                    fr.interpolate(b.values(), lam),
                );
                s += w * (x[0] * y[0] + x[1] * y[1]);
            }
            for &v in &fr.vertices {
                num[v] += fr.area * s;
                den[v] += fr.area;
            }
        }
        Ok(Cochain::new(
            0,
            num.iter().zip(&den).map(|(n, d)| n / d).collect(),
        ))
    }
}
