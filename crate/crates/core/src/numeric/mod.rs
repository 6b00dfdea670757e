// SPDX-License-Identifier: MIT OR Apache-2.0

//! Small dense kernels: symmetric eigendecomposition, seeded k-means and
//! minimum-cost assignment.

mod eigh;
mod hungarian;
mod kmeans;

pub use eigh::{eigh_symmetric, Eigen};
pub use hungarian::{assignment_cost, hungarian};
pub use kmeans::{kmeans, KMeansResult};

use crate::error::{Error, Result};

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Dense square matrix whose entries are symmetric to within `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Row-major `n × n` entries.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::NotSquare);
        }
        for i in 0..n {
            for j in 0..n {
                let v = data[i * n + j];
                if !v.is_finite() {
                    return Err(Error::NonFiniteEntry(i, j));
                }
                if j > i {
                    let gap = (v - data[j * n + i]).abs();
                    if gap > SYMMETRY_TOLERANCE {
                        return Err(Error::NotSymmetric { i, j, gap });
                    }
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare);
        }
        Self::from_row_major(n, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub(crate) fn as_slice(&self) -> &[f64] {
        &self.data
    }
}
