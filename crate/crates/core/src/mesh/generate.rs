//! Mesh generators: flat tori (intrinsic), embedded tori, the genus-2 double
//! torus, and small genus-0 solids used as negative controls.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::{FlatChart, SurfaceMesh};
use crate::error::{Error, Result};

/// Regular tetrahedron inscribed in the cube `[-1, 1]³`.
pub fn tetrahedron() -> SurfaceMesh {
    let pos = vec![
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ];
    let tris = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    SurfaceMesh::from_embedded(pos, tris).expect("tetrahedron is a valid closed surface")
}

pub fn icosahedron() -> SurfaceMesh {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let pos = vec![
        [-1.0, g, 0.0],
        [1.0, g, 0.0],
        [-1.0, -g, 0.0],
        [1.0, -g, 0.0],
        [0.0, -1.0, g],
        [0.0, 1.0, g],
        [0.0, -1.0, -g],
        [0.0, 1.0, -g],
        [g, 0.0, -1.0],
        [g, 0.0, 1.0],
        [-g, 0.0, -1.0],
        [-g, 0.0, 1.0],
    ];
    let tris = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    SurfaceMesh::from_embedded(pos, tris).expect("icosahedron is a valid closed surface")
}

/// Flat torus `R² / (lx Z × ly Z)` on an `nx × ny` grid with every cell split along
/// its (i, j) → (i+1, j+1) diagonal. Edge lengths are exact flat-metric lengths.
pub fn generate_flat_torus(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<SurfaceMesh> {
    if nx < 3 || ny < 3 {
        return Err(Error::InvalidArgument(format!(
            "flat torus needs at least 3 cells per direction, got {nx}x{ny}"
        )));
    }
    if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
        return Err(Error::InvalidArgument(
            "torus periods must be positive".into(),
        ));
    }
    let id = |i: usize, j: usize| (j % ny) * nx + (i % nx);
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    let coords: Vec<[f64; 2]> = (0..nx * ny)
        .map(|v| {
            let (i, j) = (v % nx, v / nx);
            [i as f64 * lx / nx as f64, j as f64 * ly / ny as f64]
        })
        .collect();
    let chart = FlatChart { lx, ly, coords };
    let mesh = SurfaceMesh::from_intrinsic(nx * ny, tris, |a, b| {
        let d = chart.displacement(a, b);
        d[0].hypot(d[1])
    })?;
    Ok(mesh.with_chart(chart))
}

struct TorusGrid {
    positions: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
}

/// Parametric torus around the z axis; vertex `(i, j)` has id `i * nv + j`
/// where `i` indexes the major angle and `j` the tube angle.
fn torus_grid(nu: usize, nv: usize, major: f64, minor: f64, center: [f64; 3]) -> TorusGrid {
    let mut positions = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let rho = major + minor * v.cos();
            positions.push([
                center[0] + rho * u.cos(),
                center[1] + rho * u.sin(),
                center[2] + minor * v.sin(),
            ]);
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut triangles = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    TorusGrid {
        positions,
        triangles,
    }
}

/// Embedded torus of revolution with outward orientation.
pub fn generate_embedded_torus(
    nu: usize,
    nv: usize,
    major: f64,
    minor: f64,
) -> Result<SurfaceMesh> {
    if nu < 3 || nv < 3 || !(major > minor && minor > 0.0) {
        return Err(Error::InvalidArgument(
            "embedded torus needs nu, nv >= 3 and major > minor > 0".into(),
        ));
    }
    let g = torus_grid(nu, nv, major, minor, [0.0; 3]);
    SurfaceMesh::from_embedded(g.positions, g.triangles)
}

/// Geometry of the generated double torus.
#[derive(Clone, Debug)]
pub struct Genus2Params {
    /// grid cells around the major circle of each torus
    pub nu: usize,
    /// grid cells around the tube
    pub nv: usize,
    pub major_radius: f64,
    pub minor_radius: f64,
    /// distance of each torus center from the mirror plane x = 0
    pub offset: f64,
    /// grid cells per side of the square hole cut out of each torus (even)
    pub hole: usize,
    /// intermediate vertex rings along the connecting tube
    pub bridge_rings: usize,
}

impl Default for Genus2Params {
    fn default() -> Self {
        Self {
            nu: 24,
            nv: 12,
            major_radius: 1.0,
            minor_radius: 0.4,
            offset: 1.6,
            hole: 2,
            bridge_rings: 2,
        }
    }
}

/// Closed genus-2 surface from the default [`Genus2Params`], refined by
/// `subdivision` rounds of Loop subdivision.
pub fn generate_genus2(subdivision: usize) -> Result<SurfaceMesh> {
    Genus2Params::default().build(subdivision)
}

impl Genus2Params {
    /// Two mirrored tori, each with a square disk removed on the sides facing each
    /// other, joined by a tube of triangle strips between the two hole boundaries.
    pub fn build(&self, subdivision: usize) -> Result<SurfaceMesh> {
        let (nu, nv, k) = (self.nu, self.nv, self.hole);
        if k < 2 || k % 2 != 0 || nu < k + 4 || nv < k + 4 {
            return Err(Error::InvalidArgument(
                "genus-2 generator needs an even hole >= 2 and nu, nv >= hole + 4".into(),
            ));
        }
        let grid = torus_grid(
            nu,
            nv,
            self.major_radius,
            self.minor_radius,
            [-self.offset, 0.0, 0.0],
        );

        // remove the k x k block of cells centred on vertex (0, 0), which faces +x
        let half = k / 2;
        let in_hole = |c: usize, n: usize| c < half || c >= n - half;
        let mut keep_tris = Vec::new();
        for (q, pair) in grid.triangles.chunks(2).enumerate() {
            let (i, j) = (q / nv, q % nv);
            if !(in_hole(i, nu) && in_hole(j, nv)) {
                keep_tris.extend_from_slice(pair);
            }
        }
        let mut used = vec![false; grid.positions.len()];
        keep_tris.iter().flatten().for_each(|&v| used[v] = true);
        let mut remap = vec![usize::MAX; grid.positions.len()];
        let mut positions = Vec::new();
        for (v, &u) in used.iter().enumerate() {
            if u {
                remap[v] = positions.len();
                positions.push(grid.positions[v]);
            }
        }
        let tris_a: Vec<[usize; 3]> = keep_tris.iter().map(|t| t.map(|v| remap[v])).collect();
        let loop_a = boundary_loop(&tris_a)?;

        // mirror copy through x = 0 with reversed orientation
        let n_a = positions.len();
        let mirrored: Vec<[f64; 3]> = positions.iter().map(|p| [-p[0], p[1], p[2]]).collect();
        positions.extend(mirrored);
        let mut triangles = tris_a.clone();
        triangles.extend(tris_a.iter().map(|t| [t[0] + n_a, t[2] + n_a, t[1] + n_a]));

        // rings of the connecting tube; ring 0 is the hole of torus A, the last the hole of B
        let nr = self.bridge_rings;
        let mut rings: Vec<Vec<usize>> = vec![loop_a.clone()];
        for r in 1..=nr {
            let s = r as f64 / (nr + 1) as f64;
            let ring = loop_a
                .iter()
                .map(|&a| {
                    let p = positions[a];
                    positions.push([p[0] * (1.0 - 2.0 * s), p[1], p[2]]);
                    positions.len() - 1
                })
                .collect();
            rings.push(ring);
        }
        rings.push(loop_a.iter().map(|&a| a + n_a).collect());

        let n = loop_a.len();
        for w in rings.windows(2) {
            let (x, y) = (&w[0], &w[1]);
            for i in 0..n {
                let i1 = (i + 1) % n;
                triangles.push([x[i1], x[i], y[i]]);
                triangles.push([x[i1], y[i], y[i1]]);
            }
        }

        let mut mesh = SurfaceMesh::from_embedded(positions, triangles)?;
        for _ in 0..subdivision {
            mesh = loop_subdivide(&mesh)?;
        }
        Ok(mesh)
    }
}

/// The single boundary loop of an open triangle set, ordered along the directed
/// boundary edges `a_i → a_{i+1}` of the triangles.
fn boundary_loop(tris: &[[usize; 3]]) -> Result<Vec<usize>> {
    let mut directed = HashMap::new();
    for t in tris {
        for j in 0..3 {
            directed.insert((t[j], t[(j + 1) % 3]), ());
        }
    }
    let mut next: HashMap<usize, usize> = HashMap::new();
    for &(a, b) in directed.keys() {
        if !directed.contains_key(&(b, a)) && next.insert(a, b).is_some() {
            return Err(Error::InvalidMesh("boundary is not a simple loop".into()));
        }
    }
    let start = *next
        .keys()
        .min()
        .ok_or_else(|| Error::InvalidMesh("no boundary found".into()))?;
    let mut lp = vec![start];
    let mut cur = next[&start];
    while cur != start {
        lp.push(cur);
        cur = next[&cur];
        if lp.len() > next.len() {
            return Err(Error::InvalidMesh("boundary is not a simple loop".into()));
        }
    }
    if lp.len() != next.len() {
        return Err(Error::InvalidMesh("boundary has several loops".into()));
    }
    Ok(lp)
}

/// One round of Loop subdivision of an embedded closed mesh. Connectivity is
/// split 1-to-4 and vertices are placed by the Loop stencils.
pub fn loop_subdivide(mesh: &SurfaceMesh) -> Result<SurfaceMesh> {
    let pos = mesh
        .positions()
        .ok_or_else(|| Error::InvalidArgument("Loop subdivision needs an embedded mesh".into()))?;
    let nv = mesh.n_vertices();
    let nbrs = mesh.vertex_neighbors();
    let mut out: Vec<[f64; 3]> = Vec::with_capacity(nv + mesh.n_edges());

    for (v, nb) in nbrs.iter().enumerate() {
        let n = nb.len() as f64;
        let c = 3.0 / 8.0 + 0.25 * (2.0 * PI / n).cos();
        let beta = (5.0 / 8.0 - c * c) / n;
        let mut p = pos[v].map(|x| (1.0 - n * beta) * x);
        for &w in nb {
            (0..3).for_each(|k| p[k] += beta * pos[w][k]);
        }
        out.push(p);
    }
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let [t0, t1] = mesh.edge_triangles()[e];
        let (c, d) = (mesh.opposite_vertex(t0, e), mesh.opposite_vertex(t1, e));
        out.push(std::array::from_fn(|k| {
            0.375 * (pos[a][k] + pos[b][k]) + 0.125 * (pos[c][k] + pos[d][k])
        }));
    }

    let mut tris = Vec::with_capacity(4 * mesh.n_triangles());
    for (t, le) in mesh.triangles().iter().zip(mesh.triangle_edges()) {
        let [a, b, c] = *t;
        let [ab, bc, ca] = le.map(|l| nv + l.edge);
        tris.push([a, ab, ca]);
        tris.push([ab, b, bc]);
        tris.push([ca, bc, c]);
        tris.push([ab, bc, ca]);
    }
    SurfaceMesh::from_embedded(out, tris)
}
