//! Compressed sparse row matrices and direct factorizations.
//!
//! Assembly, products and matrix-vector kernels live here; the numeric
//! factorizations (AMD-ordered supernodal Cholesky and sparse LU) are
//! delegated to `faer`. All kernels run sequentially with a fixed summation
//! order so that results are bitwise reproducible.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{MatMut, Par, Side};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

static SEQUENTIAL: Once = Once::new();

/// faer defaults to a thread pool; pin it to sequential execution for determinism.
fn force_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed in
    /// input order, so the result only depends on the triplet sequence.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        // stable: equal (row, col) keep their input order
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (r, c, v) = triplets[k];
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.indptr[i]..self.indptr[i + 1];
        match self.indices[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yi = acc;
        }
    }

    /// `Aᵀ x` without forming the transpose.
    pub fn tmatvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for k in self.indptr[i]..self.indptr[i + 1] {
                y[self.indices[k]] += self.values[k] * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &triplets)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, other: &Self, alpha: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let triplets: Vec<_> = self
            .triplets()
            .chain(other.triplets().map(|(i, j, v)| (i, j, alpha * v)))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, &triplets)
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "inner dimensions differ");
        let mut triplets = Vec::new();
        let mut acc = vec![0.0; other.ncols];
        let mut touched = vec![false; other.ncols];
        let mut cols = Vec::new();
        for i in 0..self.nrows {
            cols.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                triplets.push((i, j, acc[j]));
                acc[j] = 0.0;
                touched[j] = false;
            }
        }
        Self::from_triplets(self.nrows, other.ncols, &triplets)
    }

    /// Symmetric block matrix `[[a, b], [c, d]]` assembled from four blocks.
    pub fn block2x2(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        assert_eq!(a.nrows, b.nrows);
        assert_eq!(c.nrows, d.nrows);
        assert_eq!(a.ncols, c.ncols);
        assert_eq!(b.ncols, d.ncols);
        let (r0, c0) = (a.nrows, a.ncols);
        let triplets: Vec<_> = a
            .triplets()
            .chain(b.triplets().map(|(i, j, v)| (i, j + c0, v)))
            .chain(c.triplets().map(|(i, j, v)| (i + r0, j, v)))
            .chain(d.triplets().map(|(i, j, v)| (i + r0, j + c0, v)))
            .collect();
        Self::from_triplets(r0 + c.nrows, c0 + b.ncols, &triplets)
    }

    /// Drops row and column `k` of a square matrix.
    pub fn without_row_col(&self, k: usize) -> Self {
        assert_eq!(self.nrows, self.ncols);
        let shift = |i: usize| if i > k { i - 1 } else { i };
        let triplets: Vec<_> = self
            .triplets()
            .filter(|&(i, j, _)| i != k && j != k)
            .map(|(i, j, v)| (shift(i), shift(j), v))
            .collect();
        Self::from_triplets(self.nrows - 1, self.ncols - 1, &triplets)
    }

    /// Largest absolute entry of `self + selfᵀ`, exact for entries stored in both triangles.
    pub fn skew_defect(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v + self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let triplets: Vec<_> = self
            .triplets()
            .map(|(i, j, v)| Triplet::new(i, j, v))
            .collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .map_err(|e| Error::Solver(format!("matrix conversion failed: {e:?}")))
    }
}

/// Sparse Cholesky factorization of a symmetric positive-definite matrix.
pub struct Cholesky {
    n: usize,
    factor: Llt<usize, f64>,
}

impl Cholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        force_sequential();
        if a.nrows() != a.ncols() {
            return Err(Error::Solver("Cholesky of a non-square matrix".into()));
        }
        let factor = a
            .to_faer()?
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Solver(format!("Cholesky factorization failed: {e}")))?;
        Ok(Self {
            n: a.nrows(),
            factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        let n = self.n;
        self.factor
            .solve_in_place(MatMut::from_column_major_slice_mut(x, n, 1));
    }
}

/// Sparse LU factorization with partial pivoting, for square nonsingular systems
/// that are not positive definite (e.g. quasi-definite saddle systems).
pub struct SparseLu {
    n: usize,
    factor: Lu<usize, f64>,
}

impl SparseLu {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        force_sequential();
        if a.nrows() != a.ncols() {
            return Err(Error::Solver("LU of a non-square matrix".into()));
        }
        let factor = a
            .to_faer()?
            .sp_lu()
            .map_err(|e| Error::Solver(format!("LU factorization failed: {e:?}")))?;
        Ok(Self {
            n: a.nrows(),
            factor,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        let n = self.n;
        self.factor
            .solve_in_place(MatMut::from_column_major_slice_mut(&mut x, n, 1));
        x
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 1, 2.5), (1, 0, -1.0)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), 3.5);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, -3.0)]);
        let b = CsrMatrix::from_triplets(3, 2, &[(0, 1, 4.0), (1, 0, 1.0), (2, 0, 5.0)]);
        let c = a.matmul(&b);
        assert_eq!(c.to_dense(), a.to_dense() * b.to_dense());
        assert_eq!(a.transpose().to_dense(), a.to_dense().transpose());
        let x = [1.0, -2.0];
        assert_eq!(a.tmatvec(&x), a.transpose().matvec(&x));
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let a = laplacian_1d(50);
        let x0: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.matvec(&x0);
        let x = Cholesky::new(&a).unwrap().solve(&b);
        for (u, v) in x.iter().zip(&x0) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = CsrMatrix::diagonal(&[1.0, -1.0]);
        assert!(Cholesky::new(&a).is_err());
    }

    #[test]
    fn lu_solves_quasi_definite_system() {
        let n = 10;
        let a = laplacian_1d(n).scale(-1.0);
        let b = CsrMatrix::from_triplets(
            n,
            n,
            &(0..n).map(|i| (i, (i + 1) % n, 0.5)).collect::<Vec<_>>(),
        );
        let bt = b.transpose();
        let m = CsrMatrix::block2x2(&a, &b, &bt, &laplacian_1d(n));
        let x0: Vec<f64> = (0..2 * n).map(|i| i as f64 - 3.0).collect();
        let rhs = m.matvec(&x0);
        let x = SparseLu::new(&m).unwrap().solve(&rhs);
        for (u, v) in x.iter().zip(&x0) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn without_row_col_drops_index() {
        let a = laplacian_1d(4);
        let r = a.without_row_col(1);
        assert_eq!(r.nrows(), 3);
        assert_eq!(r.get(0, 0), 2.0);
        assert_eq!(r.get(0, 1), 0.0);
        assert_eq!(r.get(1, 2), -1.0);
    }
}
