//! Square unitary matrices and the handful of standard gates the experiments use.
//!
//! A gate acting on `k` qubits is a `2^k × 2^k` matrix stored row-major. Local
//! basis indices are little-endian in the order targets are listed: bit `j` of
//! the local index is the state of `targets[j]`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use super::{Amplitude, EXACT_TOL};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct Unitary {
    dim: usize,
    entries: Vec<Amplitude>,
}

impl fmt::Debug for Unitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Unitary({}x{})", self.dim, self.dim)?;
        for row in self.entries.chunks(self.dim) {
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

impl Unitary {
    /// Builds a gate from a row-major matrix, rejecting anything with
    /// `max |U·U† − I| > 1e-12`.
    pub fn new(entries: Vec<Amplitude>) -> Result<Self> {
        let dim = square_dim(entries.len())?;
        if !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let gate = Self { dim, entries };
        let deviation = gate.unitarity_deviation();
        if deviation > EXACT_TOL {
            return Err(Error::NotUnitary(deviation));
        }
        Ok(gate)
    }

    /// Real-valued convenience constructor.
    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = ONE;
        }
        Self { dim, entries }
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self { dim: 2, entries: vec![h, h, h, -h] }
    }

    pub fn pauli_x() -> Self {
        Self { dim: 2, entries: vec![ZERO, ONE, ONE, ZERO] }
    }

    /// `diag(1, e^{iφ})`: the interferometer phase on the |1⟩ arm.
    pub fn phase(phi: f64) -> Self {
        Self { dim: 2, entries: vec![ONE, ZERO, ZERO, Complex64::from_polar(1.0, phi)] }
    }

    /// Rotation about the Y axis, `exp(-iθY/2)`. `ry(2α)|0⟩ = cos α|0⟩ + sin α|1⟩`.
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self {
            dim: 2,
            entries: vec![
                Complex64::new(c, 0.0),
                Complex64::new(-s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(c, 0.0),
            ],
        }
    }

    /// CNOT with the target as local qubit 0 and the control as local qubit 1.
    pub fn cnot() -> Self {
        controlled(&Self::pauli_x())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn entries(&self) -> &[Amplitude] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Self { dim: d, entries }
    }

    /// Matrix product `self · rhs`, i.e. `rhs` acts first.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch { gate_dim: rhs.dim, targets: self.n_qubits() });
        }
        Ok(Self { dim: self.dim, entries: matmul(&self.entries, &rhs.entries, self.dim) })
    }

    /// `max |U·U† − I|` over all entries.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for r in 0..d {
            for c in 0..d {
                let dot: Complex64 = (0..d)
                    .map(|k| self.entries[r * d + k] * self.entries[c * d + k].conj())
                    .sum();
                let expected = if r == c { ONE } else { ZERO };
                worst = worst.max((dot - expected).norm());
            }
        }
        worst
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim
            && self.entries.iter().zip(&other.entries).all(|(a, b)| (a - b).norm() <= tol)
    }
}

/// Block-diagonal `diag(I, U)`: acts as the identity when the control is |0⟩
/// and as `gate` when it is |1⟩.
///
/// The control becomes the most significant local qubit, so a controlled gate
/// is applied with targets `[gate targets..., control]`.
pub fn controlled(gate: &Unitary) -> Unitary {
    let d = gate.dim;
    let n = 2 * d;
    let mut entries = vec![ZERO; n * n];
    for i in 0..d {
        entries[i * n + i] = ONE;
    }
    for r in 0..d {
        for c in 0..d {
            entries[(d + r) * n + (d + c)] = gate.entries[r * d + c];
        }
    }
    Unitary { dim: n, entries }
}

fn square_dim(len: usize) -> Result<usize> {
    let dim = (len as f64).sqrt().round() as usize;
    if dim == 0 || dim * dim != len {
        return Err(Error::NotSquare { rows: dim, len });
    }
    Ok(dim)
}

pub(crate) fn matmul(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; d * d];
    for r in 0..d {
        for k in 0..d {
            let lhs = a[r * d + k];
            if lhs == ZERO {
                continue;
            }
            for c in 0..d {
                out[r * d + c] += lhs * b[k * d + c];
            }
        }
    }
    out
}
