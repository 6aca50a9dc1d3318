use std::ops::Index;

use crate::{Error, Result};

/// Tolerance used when accepting a floating-point vector as a point of the simplex.
pub(crate) const SIMPLEX_TOL: f64 = 1e-9;

/// A point of the probability simplex: nonnegative frequencies summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    /// Validates `values` as a simplex point (components in `[0, 1]`, sum 1
    /// within `1e-9`).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("simplex vector must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < -SIMPLEX_TOL) {
            return Err(Error::Config(format!(
                "simplex vector has negative or non-finite component: {values:?}"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Config(format!(
                "simplex vector sums to {sum}, expected 1"
            )));
        }
        Ok(SimplexVector(values))
    }

    /// Wraps values without validation. Callers guarantee membership.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        SimplexVector(values)
    }

    pub fn vertex(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        SimplexVector(v)
    }

    /// `(z, 1 - z)` for two-strategy games.
    pub fn binary(z: f64) -> Result<Self> {
        Self::new(vec![z, 1.0 - z])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn max_norm_distance(&self, other: &SimplexVector) -> f64 {
        max_norm_diff(&self.0, &other.0)
    }
}

impl Index<usize> for SimplexVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl AsRef<[f64]> for SimplexVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn max_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
