use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Amplitude, EXACT_TOL};
use crate::error::{Error, Result};

/// Smallest eigenvalue accepted as "non-negative".
pub const EIGEN_TOL: f64 = 1e-10;

/// Density matrix on a power-of-two dimensional space.
///
/// Construction enforces Hermiticity and unit trace within 1e-12; positivity
/// is checked separately because it needs an eigen-decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Amplitude>,
}

impl DensityMatrix {
    pub fn new(entries: Vec<Amplitude>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != entries.len() {
            return Err(Error::NotSquare { rows: dim, len: entries.len() });
        }
        if !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let rho = Self { dim, entries };
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > EXACT_TOL || trace.im.abs() > EXACT_TOL {
            return Err(Error::NotNormalized(trace.re));
        }
        let deviation = rho.hermiticity_deviation();
        if deviation > EXACT_TOL {
            return Err(Error::NotHermitian(deviation));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn pure(amplitudes: &[Amplitude]) -> Result<Self> {
        let entries = amplitudes
            .iter()
            .flat_map(|a| amplitudes.iter().map(move |b| a * b.conj()))
            .collect();
        Self::new(entries)
    }

    /// Convex combination `Σ wᵢ ρᵢ` of equally sized matrices.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let dim = parts.first().map(|(_, r)| r.dim).ok_or(Error::EmptySelection)?;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (w, rho) in parts {
            if rho.dim != dim {
                return Err(Error::DimensionMismatch { gate_dim: rho.dim, targets: dim });
            }
            for (e, r) in entries.iter_mut().zip(&rho.entries) {
                *e += r * *w;
            }
        }
        Self::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Amplitude] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Amplitude {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.entries);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        self.eigenvalues().first().is_some_and(|&e| e >= -EIGEN_TOL)
    }

    /// `⟨i|ρ|i⟩`: diagonal entries as a probability table.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}
