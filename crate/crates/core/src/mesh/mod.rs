//! Closed, oriented triangle meshes and their topology.
//!
//! A [`SurfaceMesh`] is validated at construction: every edge must be shared by
//! exactly two triangles, every vertex star must be a single disk, and the
//! triangles are re-oriented (per connected component, relative to the first
//! triangle of the component) so that neighbours traverse shared edges in
//! opposite directions. Non-orientable input is rejected.
//!
//! Downstream operators only consume edge lengths and orientations, so the
//! embedded and intrinsic metric modes feed one assembly path.

mod generate;
mod off;

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};

pub use generate::{
    generate_embedded_torus, generate_flat_torus, generate_genus2, icosahedron, tetrahedron,
    Genus2Params,
};
pub use off::{load_off, parse_off, write_off};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricMode {
    Embedded,
    Intrinsic,
}

#[derive(Clone, Debug)]
enum Metric {
    Embedded(Vec<[f64; 3]>),
    /// lengths indexed by canonical edge id
    Intrinsic(Vec<f64>),
}

/// Periodic planar chart of a flat torus `R² / (lx Z × ly Z)`.
#[derive(Clone, Debug)]
pub struct FlatChart {
    pub lx: f64,
    pub ly: f64,
    pub coords: Vec<[f64; 2]>,
}

impl FlatChart {
    /// Chart displacement from vertex `a` to vertex `b`, taking the shortest periodic image.
    pub fn displacement(&self, a: usize, b: usize) -> [f64; 2] {
        let wrap = |d: f64, l: f64| d - l * (d / l).round();
        let (pa, pb) = (self.coords[a], self.coords[b]);
        [wrap(pb[0] - pa[0], self.lx), wrap(pb[1] - pa[1], self.ly)]
    }
}

/// One local edge of a triangle: the global edge id and the sign relating the
/// triangle's traversal direction to the canonical (low → high) edge orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalEdge {
    pub edge: usize,
    pub sign: i8,
}

#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    n_vertices: usize,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    /// local edge `j` of triangle `t` runs from `t[j]` to `t[(j + 1) % 3]`
    triangle_edges: Vec<[LocalEdge; 3]>,
    edge_triangles: Vec<[usize; 2]>,
    metric: Metric,
    chart: Option<FlatChart>,
    components: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TopologyReport {
    #[serde(rename = "V")]
    pub vertices: usize,
    #[serde(rename = "E")]
    pub edges: usize,
    #[serde(rename = "F")]
    pub faces: usize,
    #[serde(rename = "chi")]
    pub euler_characteristic: i64,
    pub genus: i64,
    #[serde(skip)]
    pub connected: bool,
    #[serde(skip)]
    pub closed: bool,
    #[serde(skip)]
    pub orientable: bool,
}

impl SurfaceMesh {
    /// Mesh with the metric induced by 3D vertex positions.
    pub fn from_embedded(positions: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(i) = positions
            .iter()
            .position(|p| p.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::InvalidMesh(format!(
                "vertex {i} has a non-finite position"
            )));
        }
        let n = positions.len();
        Self::build(n, triangles, Metric::Embedded(positions), None)
    }

    /// Mesh with prescribed edge lengths; `length(a, b)` is queried once per edge.
    pub fn from_intrinsic(
        n_vertices: usize,
        triangles: Vec<[usize; 3]>,
        length: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut mesh = Self::build(n_vertices, triangles, Metric::Intrinsic(Vec::new()), None)?;
        let lengths: Vec<f64> = mesh.edges.iter().map(|&[a, b]| length(a, b)).collect();
        mesh.metric = Metric::Intrinsic(lengths);
        mesh.check_intrinsic_lengths()?;
        Ok(mesh)
    }

    pub(crate) fn with_chart(mut self, chart: FlatChart) -> Self {
        assert_eq!(chart.coords.len(), self.n_vertices);
        self.chart = Some(chart);
        self
    }

    fn build(
        n_vertices: usize,
        mut triangles: Vec<[usize; 3]>,
        metric: Metric,
        chart: Option<FlatChart>,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n_vertices) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a vertex out of range"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex")));
            }
        }

        let mut referenced = vec![false; n_vertices];
        triangles
            .iter()
            .flatten()
            .for_each(|&v| referenced[v] = true);
        if let Some(v) = referenced.iter().position(|r| !r) {
            return Err(Error::InvalidMesh(format!(
                "vertex {v} is not used by any triangle"
            )));
        }

        // canonical edges, lexicographically sorted
        let mut edges: Vec<[usize; 2]> = triangles
            .iter()
            .flat_map(|t| (0..3).map(move |j| canonical(t[j], t[(j + 1) % 3])))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let edge_id: HashMap<[usize; 2], usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();

        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); edges.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for j in 0..3 {
                incident[edge_id[&canonical(tri[j], tri[(j + 1) % 3])]].push(t);
            }
        }
        for (e, ts) in incident.iter().enumerate() {
            let [a, b] = edges[e];
            match ts.len() {
                2 => {}
                1 => return Err(Error::OpenSurface(a, b)),
                k => return Err(Error::NonManifoldEdge(a, b, k)),
            }
        }
        let edge_triangles: Vec<[usize; 2]> = incident.iter().map(|ts| [ts[0], ts[1]]).collect();

        let components = orient(&mut triangles, &edges, &edge_triangles)?;
        check_vertex_stars(n_vertices, &triangles)?;

        let triangle_edges = triangles
            .iter()
            .map(|tri| {
                std::array::from_fn(|j| {
                    let (a, b) = (tri[j], tri[(j + 1) % 3]);
                    LocalEdge {
                        edge: edge_id[&canonical(a, b)],
                        sign: if a < b { 1 } else { -1 },
                    }
                })
            })
            .collect();

        Ok(Self {
            n_vertices,
            triangles,
            edges,
            triangle_edges,
            edge_triangles,
            metric,
            chart,
            components,
        })
    }

    fn check_intrinsic_lengths(&self) -> Result<()> {
        let lengths = self.edge_lengths();
        if let Some(e) = lengths.iter().position(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidMesh(format!(
                "edge {e} has a non-positive length"
            )));
        }
        for (t, le) in self.triangle_edges.iter().enumerate() {
            let [a, b, c] = le.map(|l| lengths[l.edge]);
            if a >= b + c || b >= a + c || c >= a + b {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} violates the strict triangle inequality"
                )));
            }
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangle_edges(&self) -> &[[LocalEdge; 3]] {
        &self.triangle_edges
    }

    pub fn edge_triangles(&self) -> &[[usize; 2]] {
        &self.edge_triangles
    }

    pub fn metric_mode(&self) -> MetricMode {
        match self.metric {
            Metric::Embedded(_) => MetricMode::Embedded,
            Metric::Intrinsic(_) => MetricMode::Intrinsic,
        }
    }

    /// Vertex positions in embedded mode.
    pub fn positions(&self) -> Option<&[[f64; 3]]> {
        match &self.metric {
            Metric::Embedded(p) => Some(p),
            Metric::Intrinsic(_) => None,
        }
    }

    pub fn flat_chart(&self) -> Option<&FlatChart> {
        self.chart.as_ref()
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        match &self.metric {
            Metric::Intrinsic(l) => l.clone(),
            Metric::Embedded(p) => self
                .edges
                .iter()
                .map(|&[a, b]| {
                    let d = [p[b][0] - p[a][0], p[b][1] - p[a][1], p[b][2] - p[a][2]];
                    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
                })
                .collect(),
        }
    }

    pub fn topology(&self) -> TopologyReport {
        let v = self.n_vertices as i64;
        let e = self.edges.len() as i64;
        let f = self.triangles.len() as i64;
        let chi = v - e + f;
        TopologyReport {
            vertices: self.n_vertices,
            edges: self.edges.len(),
            faces: self.triangles.len(),
            euler_characteristic: chi,
            genus: (2 * self.components as i64 - chi) / 2,
            connected: self.components == 1,
            closed: true,
            orientable: true,
        }
    }

    /// Sorted neighbour lists of every vertex.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::new(); self.n_vertices];
        for &[a, b] in &self.edges {
            nbrs[a].push(b);
            nbrs[b].push(a);
        }
        nbrs.iter_mut().for_each(|n| n.sort_unstable());
        nbrs
    }

    /// Vertex of triangle `t` opposite to edge `e`.
    pub fn opposite_vertex(&self, t: usize, e: usize) -> usize {
        let [a, b] = self.edges[e];
        *self.triangles[t]
            .iter()
            .find(|&&v| v != a && v != b)
            .expect("edge belongs to triangle")
    }
}

fn canonical(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Does `tri` traverse the edge in the `a → b` direction?
fn traverses(tri: &[usize; 3], a: usize, b: usize) -> bool {
    (0..3).any(|j| tri[j] == a && tri[(j + 1) % 3] == b)
}

/// Flips triangles so neighbours induce opposite orientations on shared edges.
/// Returns the number of connected components.
fn orient(
    triangles: &mut [[usize; 3]],
    edges: &[[usize; 2]],
    edge_triangles: &[[usize; 2]],
) -> Result<usize> {
    let nt = triangles.len();
    let mut tri_edges: Vec<Vec<usize>> = vec![Vec::with_capacity(3); nt];
    for (e, ts) in edge_triangles.iter().enumerate() {
        tri_edges[ts[0]].push(e);
        tri_edges[ts[1]].push(e);
    }

    // flip[t] = Some(true) when t must be reversed
    let mut flip: Vec<Option<bool>> = vec![None; nt];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for seed in 0..nt {
        if flip[seed].is_some() {
            continue;
        }
        components += 1;
        flip[seed] = Some(false);
        queue.push_back(seed);
        while let Some(t) = queue.pop_front() {
            let ft = flip[t].unwrap();
            for &e in &tri_edges[t] {
                let [a, b] = edges[e];
                let s = if edge_triangles[e][0] == t {
                    edge_triangles[e][1]
                } else {
                    edge_triangles[e][0]
                };
                let same_dir = traverses(&triangles[t], a, b) == traverses(&triangles[s], a, b);
                // consistent orientation requires opposite traversal after flips
                let required = ft ^ same_dir;
                match flip[s] {
                    None => {
                        flip[s] = Some(required);
                        queue.push_back(s);
                    }
                    Some(fs) if fs != required => return Err(Error::NonOrientable(a, b)),
                    Some(_) => {}
                }
            }
        }
    }
    for (tri, f) in triangles.iter_mut().zip(&flip) {
        if f == &Some(true) {
            tri.swap(1, 2);
        }
    }
    Ok(components)
}

/// Each vertex star must be a single cycle of triangles (no pinched vertices).
fn check_vertex_stars(n_vertices: usize, triangles: &[[usize; 3]]) -> Result<()> {
    // link edges: for vertex v in oriented triangle (v, a, b), map a -> b
    let mut next: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_vertices];
    for tri in triangles {
        for j in 0..3 {
            next[tri[j]].push((tri[(j + 1) % 3], tri[(j + 2) % 3]));
        }
    }
    for (v, links) in next.iter().enumerate() {
        let map: HashMap<usize, usize> = links.iter().copied().collect();
        if map.len() != links.len() {
            return Err(Error::NonManifoldVertex(v));
        }
        let start = links[0].0;
        let mut cur = start;
        let mut steps = 0;
        loop {
            cur = match map.get(&cur) {
                Some(&n) => n,
                None => return Err(Error::NonManifoldVertex(v)),
            };
            steps += 1;
            if cur == start || steps > links.len() {
                break;
            }
        }
        if steps != links.len() {
            return Err(Error::NonManifoldVertex(v));
        }
    }
    Ok(())
}
