use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::EXACT_TOL;

/// Joint distribution `p(a, b)` of the photon outcome `a` and the ancilla
/// outcome `b`, stored as `table[a][b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub table: [[f64; 2]; 2],
}

impl JointDistribution {
    /// Validates non-negativity and unit total within 1e-12.
    pub fn new(table: [[f64; 2]; 2]) -> Result<Self> {
        let joint = Self { table };
        if table.iter().flatten().any(|&p| !p.is_finite() || p < -EXACT_TOL) {
            return Err(Error::InvalidProbability { name: "p(a,b)", value: joint.total() });
        }
        if (joint.total() - 1.0).abs() > EXACT_TOL {
            return Err(Error::NotNormalized(joint.total()));
        }
        Ok(joint)
    }

    /// From a little-endian table over `[photon, ancilla]` (entry `a + 2b`).
    pub fn from_register_table(probs: &[f64]) -> Result<Self> {
        if probs.len() != 4 {
            return Err(Error::DimensionMismatch { gate_dim: probs.len(), targets: 2 });
        }
        Self::new([[probs[0], probs[2]], [probs[1], probs[3]]])
    }

    pub fn p(&self, a: usize, b: usize) -> f64 {
        self.table[a][b]
    }

    pub fn total(&self) -> f64 {
        self.table.iter().flatten().sum()
    }

    /// Ancilla marginal `p(b)`.
    pub fn ancilla_marginal(&self) -> [f64; 2] {
        [self.table[0][0] + self.table[1][0], self.table[0][1] + self.table[1][1]]
    }

    /// Photon marginal `p(a)`.
    pub fn photon_marginal(&self) -> [f64; 2] {
        [self.table[0][0] + self.table[0][1], self.table[1][0] + self.table[1][1]]
    }

    /// `p(a | b)`, or `None` when `p(b) < 1e-12`.
    pub fn conditional_on_ancilla(&self, b: usize) -> Option<[f64; 2]> {
        let pb = self.ancilla_marginal()[b];
        (pb >= EXACT_TOL).then(|| [self.table[0][b] / pb, self.table[1][b] / pb])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.table
            .iter()
            .flatten()
            .zip(other.table.iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}
