use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real values on the oriented k-cells of a mesh (k = 0, 1, 2).
///
/// 0-cochains hold point values, 1-cochains line integrals over canonically
/// oriented edges, 2-cochains surface integrals over oriented triangles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cochain {
    degree: u8,
    values: Vec<f64>,
}

impl Cochain {
    pub fn new(degree: u8, values: Vec<f64>) -> Self {
        assert!(degree <= 2, "cochain degree must be 0, 1 or 2");
        Self { degree, values }
    }

    pub fn zeros(degree: u8, len: usize) -> Self {
        Self::new(degree, vec![0.0; len])
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Cochain) {
        assert_eq!(self.degree, other.degree, "cochain degree mismatch");
        assert_eq!(self.len(), other.len(), "cochain length mismatch");
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, b)| *a += alpha * b);
    }

    pub fn scaled(&self, alpha: f64) -> Cochain {
        Cochain::new(self.degree, self.values.iter().map(|v| alpha * v).collect())
    }

    pub(crate) fn expect_degree(&self, degree: u8) -> Result<()> {
        if self.degree != degree {
            return Err(Error::DegreeMismatch {
                expected: degree,
                found: self.degree,
            });
        }
        Ok(())
    }

    pub(crate) fn expect_len(&self, len: usize) -> Result<()> {
        if self.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: self.len(),
            });
        }
        Ok(())
    }
}

impl Add for &Cochain {
    type Output = Cochain;
    fn add(self, rhs: &Cochain) -> Cochain {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &Cochain {
    type Output = Cochain;
    fn sub(self, rhs: &Cochain) -> Cochain {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &Cochain {
    type Output = Cochain;
    fn mul(self, rhs: f64) -> Cochain {
        self.scaled(rhs)
    }
}

impl Neg for &Cochain {
    type Output = Cochain;
    fn neg(self) -> Cochain {
        self.scaled(-1.0)
    }
}
