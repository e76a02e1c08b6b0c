//! CHSH experiment with quantum-controlled setting selection.
//!
//! Qubits 0 and 1 hold the pair shared by Alice and Bob; qubits 2 and 3 are
//! their ancillas. A setting is a Y rotation by the setting angle followed
//! by a computational-basis measurement. Each party applies their first
//! setting unconditionally and then the difference rotation `Ry(a′ − a)`
//! controlled by their ancilla, so ancilla outcome `i` selects setting `i`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_1_SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::delayed_choice::BiasAngle;
use crate::error::{Error, Result};
use crate::quantum::{controlled, StateVector, Unitary, EXACT_TOL};

pub const ALICE: usize = 0;
pub const BOB: usize = 1;
pub const ALICE_ANCILLA: usize = 2;
pub const BOB_ANCILLA: usize = 3;

/// Rotation angle (radians) applied before a computational-basis measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting(pub f64);

impl MeasurementSetting {
    pub fn rotation(self) -> Unitary {
        Unitary::ry(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub a: MeasurementSetting,
    pub a_prime: MeasurementSetting,
    pub b: MeasurementSetting,
    pub b_prime: MeasurementSetting,
}

impl ChshSettings {
    pub fn new(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        Self {
            a: MeasurementSetting(a),
            a_prime: MeasurementSetting(a_prime),
            b: MeasurementSetting(b),
            b_prime: MeasurementSetting(b_prime),
        }
    }

    /// `a = 0, a′ = π/2, b = π/4, b′ = −π/4`, which reach `2√2` on the Bell pair.
    pub fn optimal() -> Self {
        Self::new(0.0, FRAC_PI_2, FRAC_PI_4, -FRAC_PI_4)
    }

    pub fn alice(&self, branch: usize) -> MeasurementSetting {
        if branch == 0 { self.a } else { self.a_prime }
    }

    pub fn bob(&self, branch: usize) -> MeasurementSetting {
        if branch == 0 { self.b } else { self.b_prime }
    }
}

/// Per-branch results are indexed `[alice ancilla][bob ancilla]`; branch
/// `(0, 0)` is `(A, B)`, `(0, 1)` is `(A, B′)` and so on. Joint tables are
/// over `(alice, bob)` outcomes with index `alice + 2·bob`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshResult {
    pub settings: ChshSettings,
    pub bias_alice: f64,
    pub bias_bob: f64,
    pub branch_probabilities: [[f64; 2]; 2],
    pub conditional_tables: [[Option<[f64; 4]>; 2]; 2],
    pub fixed_setting_tables: [[[f64; 4]; 2]; 2],
    pub correlators: [[Option<f64>; 2]; 2],
    /// `E(A,B) + E(A,B′) + E(A′,B) − E(A′,B′)` when every branch is observable.
    pub s: Option<f64>,
    /// Largest gap between a conditioned table and its fixed-setting circuit.
    pub conditioning_deviation: f64,
    /// Largest gap between reading the pair before and after the ancillas.
    pub order_deviation: f64,
    /// Largest change of Alice's (Bob's) marginal across Bob's (Alice's) branches.
    pub signaling_deviation: f64,
}

impl ChshResult {
    pub fn correlator(&self, alice: usize, bob: usize) -> Result<f64> {
        self.correlators[alice][bob].ok_or(Error::UndefinedCorrelator {
            alice: alice as u8,
            bob: bob as u8,
            probability: self.branch_probabilities[alice][bob],
        })
    }

    pub fn checks_pass(&self) -> bool {
        self.conditioning_deviation <= EXACT_TOL && self.order_deviation <= EXACT_TOL && self.signaling_deviation <= EXACT_TOL
    }
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell_pair() -> StateVector {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    StateVector::from_amplitudes(vec![h, z, z, h]).expect("Bell state is normalized")
}

/// `p(same) − p(different)` for a table indexed `alice + 2·bob`.
pub fn correlator(table: &[f64; 4]) -> f64 {
    table[0] + table[3] - table[1] - table[2]
}

/// `E(A,B) + E(A,B′) + E(A′,B) − E(A′,B′)`.
pub fn chsh_combination(e_ab: f64, e_ab_prime: f64, e_a_prime_b: f64, e_a_prime_b_prime: f64) -> f64 {
    e_ab + e_ab_prime + e_a_prime_b - e_a_prime_b_prime
}

pub fn chsh_value(result: &ChshResult) -> Result<f64> {
    Ok(chsh_combination(
        result.correlator(0, 0)?,
        result.correlator(0, 1)?,
        result.correlator(1, 0)?,
        result.correlator(1, 1)?,
    ))
}

/// Outcome table of the pair measured with fixed settings.
pub fn fixed_setting_table(pair: &StateVector, alice: MeasurementSetting, bob: MeasurementSetting) -> Result<[f64; 4]> {
    let s = pair.apply_gate(&alice.rotation(), &[ALICE])?.apply_gate(&bob.rotation(), &[BOB])?;
    let p = s.probabilities(&[ALICE, BOB])?;
    Ok([p[0], p[1], p[2], p[3]])
}

/// Four-qubit register after the controlled-setting circuit, before any
/// measurement.
pub fn controlled_setting_state(pair: &StateVector, settings: &ChshSettings, bias_alice: BiasAngle, bias_bob: BiasAngle) -> Result<StateVector> {
    if pair.n_qubits() != 2 {
        return Err(Error::DimensionMismatch { gate_dim: 1 << pair.n_qubits(), targets: 2 });
    }
    pair.tensor(&StateVector::zero(2)?)?
        .apply_gate(&bias_alice.preparation(), &[ALICE_ANCILLA])?
        .apply_gate(&bias_bob.preparation(), &[BOB_ANCILLA])?
        .apply_gate(&settings.a.rotation(), &[ALICE])?
        .apply_gate(&controlled(&Unitary::ry(settings.a_prime.0 - settings.a.0)), &[ALICE, ALICE_ANCILLA])?
        .apply_gate(&settings.b.rotation(), &[BOB])?
        .apply_gate(&controlled(&Unitary::ry(settings.b_prime.0 - settings.b.0)), &[BOB, BOB_ANCILLA])
}

/// Runs the quantum-controlled CHSH experiment on the Bell pair.
pub fn quantum_controlled_chsh(settings: &ChshSettings, bias_alice: BiasAngle, bias_bob: BiasAngle) -> Result<ChshResult> {
    quantum_controlled_chsh_on(&bell_pair(), settings, bias_alice, bias_bob)
}

/// Runs the quantum-controlled CHSH experiment on an arbitrary two-qubit input.
pub fn quantum_controlled_chsh_on(pair: &StateVector, settings: &ChshSettings, bias_alice: BiasAngle, bias_bob: BiasAngle) -> Result<ChshResult> {
    let state = controlled_setting_state(pair, settings, bias_alice, bias_bob)?;
    let all = [ALICE, BOB, ALICE_ANCILLA, BOB_ANCILLA];
    // Entry index: alice + 2 bob + 4 i + 8 j.
    let system_first = state.sequential_probabilities(&all)?;
    let ancillas_first = state.sequential_probabilities(&[ALICE_ANCILLA, BOB_ANCILLA, ALICE, BOB])?;
    let order_deviation = max_gap(&system_first, &ancillas_first);

    let mut result = ChshResult {
        settings: *settings,
        bias_alice: bias_alice.0,
        bias_bob: bias_bob.0,
        branch_probabilities: [[0.0; 2]; 2],
        conditional_tables: [[None; 2]; 2],
        fixed_setting_tables: [[[0.0; 4]; 2]; 2],
        correlators: [[None; 2]; 2],
        s: None,
        conditioning_deviation: 0.0,
        order_deviation,
        signaling_deviation: 0.0,
    };

    for i in 0..2 {
        for j in 0..2 {
            let block = &system_first[4 * i + 8 * j..4 * i + 8 * j + 4];
            let pij: f64 = block.iter().sum();
            result.branch_probabilities[i][j] = pij;
            let fixed = fixed_setting_table(pair, settings.alice(i), settings.bob(j))?;
            result.fixed_setting_tables[i][j] = fixed;
            if pij < EXACT_TOL {
                continue;
            }
            let table = [block[0] / pij, block[1] / pij, block[2] / pij, block[3] / pij];
            result.conditioning_deviation = result.conditioning_deviation.max(max_gap(&table, &fixed));
            result.conditional_tables[i][j] = Some(table);
            result.correlators[i][j] = Some(correlator(&table));
        }
    }

    let alice_marginal = |t: &[f64; 4]| t[1] + t[3];
    let bob_marginal = |t: &[f64; 4]| t[2] + t[3];
    let tables = &result.conditional_tables;
    for (k, row) in tables.iter().enumerate() {
        if let (Some(t0), Some(t1)) = (row[0], row[1]) {
            result.signaling_deviation = result.signaling_deviation.max((alice_marginal(&t0) - alice_marginal(&t1)).abs());
        }
        if let (Some(t0), Some(t1)) = (tables[0][k], tables[1][k]) {
            result.signaling_deviation = result.signaling_deviation.max((bob_marginal(&t0) - bob_marginal(&t1)).abs());
        }
    }
    result.s = chsh_value(&result).ok();
    Ok(result)
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::SQRT_2;

    use approx::assert_abs_diff_eq;

    use super::*;

    const UNBIASED: BiasAngle = BiasAngle(FRAC_PI_4);

    #[test]
    fn bell_pair_examples() {
        let b = bell_pair();
        let p = b.probabilities(&[0, 1]).unwrap();
        for (got, want) in p.iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = EXACT_TOL);
        }
        for q in 0..2 {
            let rho = b.partial_trace(&[q]).unwrap();
            assert_abs_diff_eq!(rho.get(0, 0).re, 0.5, epsilon = EXACT_TOL);
            assert!(rho.get(0, 1).norm() < EXACT_TOL);
        }
        let prepared = StateVector::zero(2)
            .unwrap()
            .apply_gate(&Unitary::hadamard(), &[0])
            .unwrap()
            .apply_gate(&Unitary::cnot(), &[1, 0])
            .unwrap();
        assert_abs_diff_eq!(prepared.fidelity(&b).unwrap(), 1.0, epsilon = EXACT_TOL);
    }

    #[test]
    fn tsirelson_at_optimal_settings() {
        let r = quantum_controlled_chsh(&ChshSettings::optimal(), UNBIASED, UNBIASED).unwrap();
        assert_abs_diff_eq!(r.s.unwrap(), 2.0 * SQRT_2, epsilon = 1e-9);
        assert!(r.checks_pass(), "{r:?}");
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(r.branch_probabilities[i][j], 0.25, epsilon = EXACT_TOL);
                let e = r.correlator(i, j).unwrap().abs();
                assert_abs_diff_eq!(e, FRAC_1_SQRT_2, epsilon = EXACT_TOL);
            }
        }
    }

    #[test]
    fn equal_settings_collapse() {
        let s = ChshSettings::new(0.4, 0.4, 1.1, 1.1);
        let r = quantum_controlled_chsh(&s, UNBIASED, BiasAngle(0.3)).unwrap();
        let e = r.correlator(0, 0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(r.correlator(i, j).unwrap(), e, epsilon = EXACT_TOL);
            }
        }
        assert_abs_diff_eq!(r.s.unwrap(), 2.0 * e, epsilon = EXACT_TOL);
        assert!(r.s.unwrap() <= 2.0 + 1e-12);
    }

    #[test]
    fn separable_input_respects_classical_bound() {
        let product = StateVector::zero(2).unwrap();
        let r = quantum_controlled_chsh_on(&product, &ChshSettings::optimal(), UNBIASED, UNBIASED).unwrap();
        assert!(r.s.unwrap() <= 2.0 + 1e-9);
        assert_abs_diff_eq!(r.s.unwrap(), SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn chsh_value_examples() {
        assert_eq!(chsh_combination(1.0, 1.0, 1.0, -1.0), 4.0);
        assert_eq!(chsh_combination(0.5, 0.5, 0.5, -0.5), 2.0);
        let h = FRAC_1_SQRT_2;
        assert_abs_diff_eq!(chsh_combination(h, h, h, -h), 2.0 * SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn undefined_branch_correlator() {
        let r = quantum_controlled_chsh(&ChshSettings::optimal(), BiasAngle(0.0), UNBIASED).unwrap();
        assert!(r.correlators[1][0].is_none());
        assert!(r.s.is_none());
        assert!(matches!(chsh_value(&r).unwrap_err(), Error::UndefinedCorrelator { alice: 1, bob: 0, .. }));
        assert!(r.correlator(0, 1).is_ok());
    }

    #[test]
    fn rejects_wrong_pair_size() {
        let three = StateVector::zero(3).unwrap();
        assert!(quantum_controlled_chsh_on(&three, &ChshSettings::optimal(), UNBIASED, UNBIASED).is_err());
    }
}
