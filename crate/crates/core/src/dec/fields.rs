//! Sampling analytic fields onto cochains, and seeded random cochains.
//!
//! Points are chart coordinates `(x, y, 0)` on flat tori and vertex positions
//! on embedded meshes. 1-forms are given as ambient covector fields and
//! integrated along each canonically oriented edge.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Cochain;
use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;

// 5-point Gauss–Legendre on [0, 1]
const GL_NODES: [f64; 5] = [
    0.046_910_077_030_668,
    0.230_765_344_947_158,
    0.5,
    0.769_234_655_052_842,
    0.953_089_922_969_332,
];
const GL_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_095,
    0.239_314_335_249_683,
    0.284_444_444_444_444,
    0.239_314_335_249_683,
    0.118_463_442_528_095,
];

/// Coordinates of every vertex used for sampling.
pub fn vertex_points(mesh: &SurfaceMesh) -> Vec<[f64; 3]> {
    match (mesh.flat_chart(), mesh.positions()) {
        (Some(chart), _) => chart.coords.iter().map(|c| [c[0], c[1], 0.0]).collect(),
        (None, Some(p)) => p.to_vec(),
        (None, None) => unreachable!("intrinsic meshes are only generated with a chart"),
    }
}

/// Start point and displacement of every canonical edge.
fn edge_segments(mesh: &SurfaceMesh) -> Vec<([f64; 3], [f64; 3])> {
    let pts = vertex_points(mesh);
    mesh.edges()
        .iter()
        .map(|&[a, b]| {
            let d = match mesh.flat_chart() {
                Some(chart) => {
                    let d = chart.displacement(a, b);
                    [d[0], d[1], 0.0]
                }
                None => [
                    pts[b][0] - pts[a][0],
                    pts[b][1] - pts[a][1],
                    pts[b][2] - pts[a][2],
                ],
            };
            (pts[a], d)
        })
        .collect()
}

pub fn sample_function(mesh: &SurfaceMesh, f: impl Fn([f64; 3]) -> f64) -> Cochain {
    Cochain::new(0, vertex_points(mesh).into_iter().map(f).collect())
}

/// Line integrals of the covector field `alpha` over every edge.
pub fn integrate_one_form(mesh: &SurfaceMesh, alpha: impl Fn([f64; 3]) -> [f64; 3]) -> Cochain {
    let values = edge_segments(mesh)
        .into_iter()
        .map(|(p, d)| {
            GL_NODES
                .iter()
                .zip(GL_WEIGHTS)
                .map(|(&s, w)| {
                    let a = alpha([p[0] + s * d[0], p[1] + s * d[1], p[2] + s * d[2]]);
                    w * (a[0] * d[0] + a[1] * d[1] + a[2] * d[2])
                })
                .sum()
        })
        .collect();
    Cochain::new(1, values)
}

fn require_chart(mesh: &SurfaceMesh) -> Result<()> {
    if mesh.flat_chart().is_none() {
        return Err(Error::InvalidArgument(
            "field requires a flat torus mesh".into(),
        ));
    }
    Ok(())
}

/// The coordinate 1-form `dx` of a flat torus.
pub fn flat_dx(mesh: &SurfaceMesh) -> Result<Cochain> {
    require_chart(mesh)?;
    Ok(integrate_one_form(mesh, |_| [1.0, 0.0, 0.0]))
}

/// The coordinate 1-form `dy` of a flat torus.
pub fn flat_dy(mesh: &SurfaceMesh) -> Result<Cochain> {
    require_chart(mesh)?;
    Ok(integrate_one_form(mesh, |_| [0.0, 1.0, 0.0]))
}

/// Independent uniform values in `[-1, 1]` on every vertex.
pub fn random_function(mesh: &SurfaceMesh, seed: u64) -> Cochain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Cochain::new(
        0,
        (0..mesh.n_vertices())
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect(),
    )
}

/// Independent uniform values in `[-1, 1]` on every edge.
pub fn random_one_form(mesh: &SurfaceMesh, seed: u64) -> Cochain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Cochain::new(
        1,
        (0..mesh.n_edges())
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect(),
    )
}

/// Smooth random 1-form on a flat torus: random Fourier modes up to wavenumber
/// `kmax` in each component.
pub fn random_fourier_one_form(mesh: &SurfaceMesh, seed: u64, kmax: i32) -> Result<Cochain> {
    let chart = mesh
        .flat_chart()
        .ok_or_else(|| Error::InvalidArgument("field requires a flat torus mesh".into()))?;
    let (lx, ly) = (chart.lx, chart.ly);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for kx in -kmax..=kmax {
        for ky in -kmax..=kmax {
            let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
            modes.push((2.0 * PI * kx as f64 / lx, 2.0 * PI * ky as f64 / ly, c));
        }
    }
    Ok(integrate_one_form(mesh, |p| {
        let mut a = [0.0; 3];
        for &(kx, ky, c) in &modes {
            let ph = kx * p[0] + ky * p[1];
            let (s, co) = ph.sin_cos();
            a[0] += c[0] * co + c[1] * s;
            a[1] += c[2] * co + c[3] * s;
        }
        a
    }))
}
