use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::density::DensityMatrix;
use super::gates::Unitary;
use super::{Amplitude, EXACT_TOL, MAX_QUBITS};
use crate::error::{Error, Result};

/// Normalized dense state of `n_qubits` qubits.
///
/// Basis label `k` has qubit `i` in state `(k >> i) & 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Amplitude>,
}

/// Result of a projective single-qubit measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub bit: u8,
    pub probability: f64,
    pub post_state: StateVector,
}

impl StateVector {
    /// |0…0⟩ on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, label: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::EmptySelection);
        }
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let len = 1usize << n_qubits;
        if label >= len {
            return Err(Error::QubitOutOfRange { index: label, n_qubits });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        amplitudes[label] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    /// Accepts an amplitude vector whose squared norm is 1 within 1e-12.
    pub fn from_amplitudes(amplitudes: Vec<Amplitude>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > EXACT_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn amplitude(&self, label: usize) -> Amplitude {
        self.amplitudes[label]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `self ⊗ upper` with `self` on the low qubits and `upper` above it.
    pub fn tensor(&self, upper: &StateVector) -> Result<StateVector> {
        let n_qubits = self.n_qubits + upper.n_qubits;
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let amplitudes = upper
            .amplitudes
            .iter()
            .flat_map(|hi| self.amplitudes.iter().map(move |lo| lo * hi))
            .collect();
        Ok(StateVector { n_qubits, amplitudes })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Amplitude> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                gate_dim: other.amplitudes.len(),
                targets: self.n_qubits,
            });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// True when the states agree up to a global phase: `|⟨a|b⟩| ≥ 1 − tol`.
    pub fn equal_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        self.inner(other).map(|z| z.norm() >= 1.0 - tol).unwrap_or(false)
    }

    /// Applies `gate` to the ordered `targets`; `targets[j]` is bit `j` of
    /// the gate's local basis index.
    pub fn apply_gate(&self, gate: &Unitary, targets: &[usize]) -> Result<StateVector> {
        if gate.dim() != 1usize << targets.len() {
            return Err(Error::DimensionMismatch { gate_dim: gate.dim(), targets: targets.len() });
        }
        self.check_indices(targets)?;
        let d = gate.dim();
        let target_mask: usize = targets.iter().map(|&t| 1 << t).sum();
        // Offsets of each local basis state in the full register.
        let offsets: Vec<usize> = (0..d)
            .map(|local| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| local >> j & 1 == 1)
                    .map(|(_, &t)| 1 << t)
                    .sum()
            })
            .collect();

        let mut out = self.amplitudes.clone();
        let mut scratch = vec![Complex64::new(0.0, 0.0); d];
        for base in (0..self.amplitudes.len()).filter(|k| k & target_mask == 0) {
            for (slot, off) in scratch.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let row = &gate.entries()[r * d..(r + 1) * d];
                out[base | off] = row.iter().zip(&scratch).map(|(g, a)| g * a).sum();
            }
        }
        Ok(StateVector { n_qubits: self.n_qubits, amplitudes: out })
    }

    /// Marginal outcome table over `qubits`; entry `k` has `qubits[j]` in
    /// state `(k >> j) & 1`.
    pub fn probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.check_indices(qubits)?;
        let mut table = vec![0.0; 1 << qubits.len()];
        for (label, amp) in self.amplitudes.iter().enumerate() {
            let local: usize =
                qubits.iter().enumerate().map(|(j, &q)| ((label >> q) & 1) << j).sum();
            table[local] += amp.norm_sqr();
        }
        Ok(table)
    }

    /// Probability that `qubit` reads `outcome`.
    pub fn outcome_probability(&self, qubit: usize, outcome: u8) -> Result<f64> {
        check_outcome(outcome)?;
        Ok(self.probabilities(&[qubit])?[outcome as usize])
    }

    /// Born-rule measurement of one qubit.
    pub fn measure<R: Rng + ?Sized>(&self, qubit: usize, rng: &mut R) -> Result<MeasurementOutcome> {
        let p1 = self.outcome_probability(qubit, 1)?;
        let bit = u8::from(rng.gen::<f64>() < p1);
        let probability = if bit == 1 { p1 } else { 1.0 - p1 };
        let post_state = self.project(qubit, bit, probability)?;
        Ok(MeasurementOutcome { bit, probability, post_state })
    }

    /// Projects `qubit` onto `outcome` and renormalizes.
    pub fn post_select(&self, qubit: usize, outcome: u8) -> Result<StateVector> {
        let probability = self.outcome_probability(qubit, outcome)?;
        self.project(qubit, outcome, probability)
    }

    fn project(&self, qubit: usize, outcome: u8, probability: f64) -> Result<StateVector> {
        if probability < EXACT_TOL {
            return Err(Error::ImpossibleBranch { qubit, outcome, probability });
        }
        let scale = probability.sqrt().recip();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(label, amp)| {
                if (label >> qubit) & 1 == outcome as usize {
                    amp * scale
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok(StateVector { n_qubits: self.n_qubits, amplitudes })
    }

    /// Joint outcome table of `order` obtained by measuring the qubits one at
    /// a time in that order, branching exactly on every outcome. Entry `k`
    /// has the `j`-th smallest listed qubit in state `(k >> j) & 1`, so
    /// tables from different orders are directly comparable.
    pub fn sequential_probabilities(&self, order: &[usize]) -> Result<Vec<f64>> {
        self.check_indices(order)?;
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        let mut table = vec![0.0; 1 << order.len()];
        self.branch(order, &sorted, 1.0, 0, &mut table)?;
        Ok(table)
    }

    fn branch(&self, rest: &[usize], sorted: &[usize], weight: f64, label: usize, table: &mut [f64]) -> Result<()> {
        let Some((&q, tail)) = rest.split_first() else {
            table[label] += weight;
            return Ok(());
        };
        let slot = sorted.iter().position(|&s| s == q).expect("qubit is listed");
        let p = self.probabilities(&[q])?;
        for outcome in 0..2u8 {
            if p[outcome as usize] < EXACT_TOL {
                continue;
            }
            let next = self.project(q, outcome, p[outcome as usize])?;
            next.branch(tail, sorted, weight * p[outcome as usize], label | (outcome as usize) << slot, table)?;
        }
        Ok(())
    }

    /// Reduced density matrix on `keep` (ordered as given), tracing out the rest.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptySelection);
        }
        self.check_indices(keep)?;
        let dim = 1usize << keep.len();
        let keep_mask: usize = keep.iter().map(|&q| 1 << q).sum();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        let local = |label: usize| -> usize {
            keep.iter().enumerate().map(|(j, &q)| ((label >> q) & 1) << j).sum()
        };
        // ρ[r][c] = Σ_env ψ(r, env) ψ*(c, env)
        for (i, ai) in self.amplitudes.iter().enumerate() {
            if ai.norm_sqr() == 0.0 {
                continue;
            }
            let env = i & !keep_mask;
            for (j, aj) in self.amplitudes.iter().enumerate() {
                if j & !keep_mask == env {
                    entries[local(i) * dim + local(j)] += ai * aj.conj();
                }
            }
        }
        DensityMatrix::new(entries)
    }

    fn check_indices(&self, qubits: &[usize]) -> Result<()> {
        let mut seen = 0usize;
        for &q in qubits {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits: self.n_qubits });
            }
            if seen & (1 << q) != 0 {
                return Err(Error::DuplicateQubit(q));
            }
            seen |= 1 << q;
        }
        Ok(())
    }
}

fn check_outcome(outcome: u8) -> Result<()> {
    if outcome > 1 {
        return Err(Error::InvalidOutcome(outcome));
    }
    Ok(())
}
