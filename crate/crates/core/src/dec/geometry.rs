//! Per-triangle intrinsic geometry and Whitney basis evaluation.

use crate::mesh::LocalEdge;

/// Symmetric quadrature rule on a triangle: barycentric points and weights summing to 1.
pub struct TriangleRule {
    pub points: &'static [[f64; 3]],
    pub weights: &'static [f64],
}

const A2: f64 = 2.0 / 3.0;
const B2: f64 = 1.0 / 6.0;

/// Three interior points, exact for polynomials of degree 2.
pub const DEGREE2: TriangleRule = TriangleRule {
    points: &[[A2, B2, B2], [B2, A2, B2], [B2, B2, A2]],
    weights: &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
};

const A4: f64 = 0.445_948_490_915_965;
const B4: f64 = 0.108_103_018_168_070;
const C4: f64 = 0.091_576_213_509_771;
const D4: f64 = 0.816_847_572_980_459;
const W4A: f64 = 0.223_381_589_678_011;
const W4C: f64 = 0.109_951_743_655_322;

/// Six-point Dunavant rule, exact for polynomials of degree 4.
pub const DEGREE4: TriangleRule = TriangleRule {
    points: &[
        [A4, A4, B4],
        [A4, B4, A4],
        [B4, A4, A4],
        [C4, C4, D4],
        [C4, D4, C4],
        [D4, C4, C4],
    ],
    weights: &[W4A, W4A, W4A, W4C, W4C, W4C],
};

/// A triangle laid out isometrically in a local counter-clockwise 2D frame.
#[derive(Clone, Debug)]
pub struct TriangleFrame {
    pub vertices: [usize; 3],
    pub edges: [LocalEdge; 3],
    pub area: f64,
    /// gradients of the barycentric coordinates in the local frame
    pub grads: [[f64; 2]; 3],
}

impl TriangleFrame {
    /// Builds the frame from the lengths of local edges `(0→1, 1→2, 2→0)`.
    pub fn from_lengths(vertices: [usize; 3], edges: [LocalEdge; 3], lengths: [f64; 3]) -> Self {
        let [l01, l12, l20] = lengths;
        let x2 = (l01 * l01 + l20 * l20 - l12 * l12) / (2.0 * l01);
        let y2 = (l20 * l20 - x2 * x2).max(0.0).sqrt();
        let p = [[0.0, 0.0], [l01, 0.0], [x2, y2]];
        let area = 0.5 * l01 * y2;
        // grad λ_i = J (p_{i+2} - p_{i+1}) / 2A with J(x, y) = (-y, x)
        let grads = std::array::from_fn(|i| {
            let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
            let d = [b[0] - a[0], b[1] - a[1]];
            if area > 0.0 {
                [-d[1] / (2.0 * area), d[0] / (2.0 * area)]
            } else {
                [0.0, 0.0]
            }
        });
        Self {
            vertices,
            edges,
            area,
            grads,
        }
    }

    /// Local Whitney form of edge `j` (from vertex `j` to `j+1`), in triangle orientation.
    #[inline]
    pub fn whitney(&self, j: usize, lam: &[f64; 3]) -> [f64; 2] {
        let (a, b) = (j, (j + 1) % 3);
        let (ga, gb) = (self.grads[a], self.grads[b]);
        [
            lam[a] * gb[0] - lam[b] * ga[0],
            lam[a] * gb[1] - lam[b] * ga[1],
        ]
    }

    /// All three local Whitney forms with the global edge signs applied.
    #[inline]
    pub fn signed_whitney(&self, lam: &[f64; 3]) -> [[f64; 2]; 3] {
        std::array::from_fn(|j| {
            let w = self.whitney(j, lam);
            let s = f64::from(self.edges[j].sign);
            [s * w[0], s * w[1]]
        })
    }

    /// Whitney interpolant of a global 1-cochain at barycentric point `lam`.
    #[inline]
    pub fn interpolate(&self, cochain: &[f64], lam: &[f64; 3]) -> [f64; 2] {
        let phi = self.signed_whitney(lam);
        let mut out = [0.0; 2];
        for (j, p) in phi.iter().enumerate() {
            let c = cochain[self.edges[j].edge];
            out[0] += c * p[0];
            out[1] += c * p[1];
        }
        out
    }

    /// Linear interpolant of a 0-cochain at barycentric point `lam`.
    #[inline]
    pub fn interpolate0(&self, values: &[f64], lam: &[f64; 3]) -> f64 {
        (0..3).map(|i| lam[i] * values[self.vertices[i]]).sum()
    }
}

/// `a ∧ b` of two covectors in an oriented 2D frame, as a multiple of the area form.
#[inline]
pub fn wedge(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Hodge star of a covector in an oriented 2D frame: `⋆dx = dy`, `⋆dy = -dx`.
#[inline]
pub fn rotate(a: [f64; 2]) -> [f64; 2] {
    [-a[1], a[0]]
}
