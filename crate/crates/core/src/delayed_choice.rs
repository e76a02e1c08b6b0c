//! Delayed-choice Mach-Zehnder circuits.
//!
//! The photon is qubit [`PHOTON`] and the ancilla controlling the second
//! beamsplitter is qubit [`ANCILLA`]. Beamsplitters are Hadamard gates and
//! the interferometer phase `φ` sits on the |1⟩ arm between them. The
//! "interference pattern" is the probability that the photon detector on
//! output 1 clicks.
//!
//! | circuit | control of BS₂ |
//! |---|---|
//! | [`classical_qrng_joint`] | classical random bit drawn with `p(b) = (cos²α, sin²α)` |
//! | [`measured_ancilla_joint`] | ancilla measured first, result switches BS₂ |
//! | [`qdc_state`] | controlled-Hadamard, ancilla measured later (or never) |
//! | [`entangled_variant`] | control qubit is half of a Bell pair, bias on the other half |

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint::JointDistribution;
use crate::quantum::{controlled, StateVector, Unitary, EXACT_TOL};

pub const PHOTON: usize = 0;
pub const ANCILLA: usize = 1;
/// Bell-pair partner of the control qubit in the entanglement-assisted circuit.
pub const HERALD: usize = 2;

/// Default number of φ samples for numeric visibility.
pub const DEFAULT_VISIBILITY_GRID: usize = 256;
pub const MIN_VISIBILITY_GRID: usize = 256;

/// Interferometer phase in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PhaseAngle(pub f64);

impl PhaseAngle {
    pub fn radians(self) -> f64 {
        self.0
    }

    /// The value reduced to `[0, 2π)`, for display only.
    pub fn canonical(self) -> f64 {
        let r = self.0.rem_euclid(TAU);
        if r >= TAU { 0.0 } else { r }
    }
}

/// Bias of the ancilla preparation, `cos α|0⟩ + sin α|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct BiasAngle(pub f64);

impl BiasAngle {
    pub fn radians(self) -> f64 {
        self.0
    }

    /// Probability that the ancilla reads 0 (open interferometer).
    pub fn open_probability(self) -> f64 {
        self.0.cos().powi(2)
    }

    /// Probability that the ancilla reads 1 (closed interferometer).
    pub fn closed_probability(self) -> f64 {
        self.0.sin().powi(2)
    }

    /// `Ry(2α)`, taking |0⟩ to `cos α|0⟩ + sin α|1⟩`.
    pub fn preparation(self) -> Unitary {
        Unitary::ry(2.0 * self.0)
    }
}

impl From<f64> for PhaseAngle {
    fn from(v: f64) -> Self {
        Self(v)
    }
}

impl From<f64> for BiasAngle {
    fn from(v: f64) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorphingPoint {
    pub phi: PhaseAngle,
    pub alpha: BiasAngle,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilitySummary {
    pub analytic: f64,
    pub unconditioned: f64,
    /// Pattern conditioned on ancilla 0; `None` when that branch is unobservable.
    pub particle_branch: Option<f64>,
    /// Pattern conditioned on ancilla 1; `None` when that branch is unobservable.
    pub wave_branch: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub label: String,
    pub phi: f64,
    pub alpha: f64,
    pub joint: JointDistribution,
    /// `p(a = 1 | b)` for `b = 0, 1`; `None` for an unobservable branch.
    pub conditional_patterns: [Option<f64>; 2],
    pub visibility: VisibilitySummary,
}

/// Which qubit of the quantum-controlled circuit is read out first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementOrder {
    PhotonFirst,
    AncillaFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeferredMeasurementReport {
    pub phi: f64,
    pub alpha: f64,
    pub classical_qrng: JointDistribution,
    pub measured_ancilla: JointDistribution,
    pub quantum_photon_first: JointDistribution,
    pub quantum_ancilla_first: JointDistribution,
    pub max_deviation: f64,
    pub equivalent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntangledVariantRecord {
    /// Statistics of the heralded sub-ensemble (herald qubit reads 0).
    pub record: ExperimentRecord,
    pub herald_probability: f64,
    /// `p(a, h)` of photon and herald outcome with no post-selection.
    pub photon_herald_joint: JointDistribution,
    /// Photon/control joint with no post-selection; independent of `α`.
    pub unheralded_joint: JointDistribution,
    /// The single-ancilla joint it is compared against.
    pub reference: JointDistribution,
    pub max_deviation: f64,
    /// Deviation between applying the bias before or after the controlled-H.
    pub bias_order_deviation: f64,
    pub equivalent: bool,
}

/// `|p⟩ = (|0⟩ + e^{iφ}|1⟩)/√2`.
pub fn particle_state(phi: PhaseAngle) -> StateVector {
    let h = FRAC_1_SQRT_2;
    StateVector::from_amplitudes(vec![Complex64::new(h, 0.0), Complex64::from_polar(h, phi.0)])
        .expect("particle state is normalized")
}

/// `|w⟩ = e^{iφ/2}(cos(φ/2)|0⟩ − i sin(φ/2)|1⟩)`.
pub fn wave_state(phi: PhaseAngle) -> StateVector {
    let global = Complex64::from_polar(1.0, phi.0 / 2.0);
    let (s, c) = (phi.0 / 2.0).sin_cos();
    StateVector::from_amplitudes(vec![global * c, global * Complex64::new(0.0, -s)])
        .expect("wave state is normalized")
}

/// `⟨p|w⟩` from the explicit state vectors.
pub fn overlap_pw(phi: PhaseAngle) -> Complex64 {
    particle_state(phi).inner(&wave_state(phi)).expect("both states are single-qubit")
}

/// `cos α|p⟩|0⟩ + sin α|w⟩|1⟩` assembled from the closed-form branch states.
pub fn entangled_closed_form(phi: PhaseAngle, alpha: BiasAngle) -> StateVector {
    let (s, c) = alpha.0.sin_cos();
    let zero = StateVector::basis(1, 0).expect("one qubit");
    let one = StateVector::basis(1, 1).expect("one qubit");
    let p = particle_state(phi).tensor(&zero).expect("two qubits");
    let w = wave_state(phi).tensor(&one).expect("two qubits");
    let amps = p.amplitudes().iter().zip(w.amplitudes()).map(|(x, y)| x * c + y * s).collect();
    StateVector::from_amplitudes(amps).expect("branches are orthogonal on the ancilla")
}

fn interferometer_first_half(phi: PhaseAngle) -> [(Unitary, usize); 2] {
    [(Unitary::hadamard(), PHOTON), (Unitary::phase(phi.0), PHOTON)]
}

fn biased_ancilla_register(alpha: BiasAngle) -> Result<StateVector> {
    StateVector::zero(2)?.apply_gate(&alpha.preparation(), &[ANCILLA])
}

/// Final photon/ancilla state of the quantum-controlled circuit: ancilla
/// prepared with bias `α`, photon through BS₁ and the phase, then a
/// Hadamard on the photon controlled by the ancilla.
pub fn qdc_state(phi: PhaseAngle, alpha: BiasAngle) -> StateVector {
    let run = || -> Result<StateVector> {
        let mut s = biased_ancilla_register(alpha)?;
        for (g, q) in interferometer_first_half(phi) {
            s = s.apply_gate(&g, &[q])?;
        }
        s.apply_gate(&controlled(&Unitary::hadamard()), &[PHOTON, ANCILLA])
    };
    run().expect("fixed two-qubit circuit")
}

/// `I₁(φ, α) = ½cos²α + sin²(φ/2)·sin²α`.
pub fn intensity(phi: PhaseAngle, alpha: BiasAngle) -> f64 {
    0.5 * alpha.open_probability() + (phi.0 / 2.0).sin().powi(2) * alpha.closed_probability()
}

/// Photon click probability read off the simulated state.
pub fn simulated_intensity(phi: PhaseAngle, alpha: BiasAngle) -> f64 {
    qdc_state(phi, alpha).probabilities(&[PHOTON]).expect("photon qubit exists")[1]
}

/// `V = sin²α`.
pub fn visibility_analytic(alpha: BiasAngle) -> f64 {
    alpha.closed_probability()
}

/// `(I_max − I_min)/(I_max + I_min)` of `pattern` sampled at `grid_points`
/// equally spaced phases over `[0, 2π)`.
pub fn visibility_numeric<F>(pattern: F, grid_points: usize) -> Result<f64>
where
    F: Fn(PhaseAngle) -> f64,
{
    if grid_points < MIN_VISIBILITY_GRID {
        return Err(Error::GridTooSmall { got: grid_points, min: MIN_VISIBILITY_GRID });
    }
    let (lo, hi) = phase_grid(grid_points)
        .map(pattern)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::NonFinite);
    }
    if hi + lo < EXACT_TOL {
        return Err(Error::DegeneratePattern(hi + lo));
    }
    Ok((hi - lo) / (hi + lo))
}

/// `n` equally spaced phases `2πk/n`, `k = 0..n`.
pub fn phase_grid(n: usize) -> impl Iterator<Item = PhaseAngle> {
    (0..n).map(move |k| PhaseAngle(TAU * k as f64 / n as f64))
}

/// Click probability of the photon given the ancilla outcome, obtained by
/// post-selecting the simulated state.
pub fn conditional_pattern(phi: PhaseAngle, alpha: BiasAngle, ancilla_outcome: u8) -> Result<f64> {
    let branch = qdc_state(phi, alpha).post_select(ANCILLA, ancilla_outcome)?;
    Ok(branch.probabilities(&[PHOTON])?[1])
}

pub fn morphing_sweep(phi_grid: &[PhaseAngle], alpha_grid: &[BiasAngle]) -> Vec<MorphingPoint> {
    alpha_grid
        .par_iter()
        .flat_map_iter(|&alpha| {
            phi_grid.iter().map(move |&phi| MorphingPoint { phi, alpha, intensity: intensity(phi, alpha) })
        })
        .collect()
}

/// Measures the photon of `qdc_state(φ, α)` on `shots` fresh copies and
/// counts clicks on detector 1.
pub fn sample_clicks<R: Rng + ?Sized>(phi: PhaseAngle, alpha: BiasAngle, shots: u64, rng: &mut R) -> Result<u64> {
    let p1 = qdc_state(phi, alpha).outcome_probability(PHOTON, 1)?.clamp(0.0, 1.0);
    Ok((0..shots).filter(|_| rng.gen_bool(p1)).count() as u64)
}

/// Joint table from a classical random bit: BS₂ present with probability
/// `sin²α`, the photon then run through a one-qubit open or closed MZI.
pub fn classical_qrng_joint(phi: PhaseAngle, alpha: BiasAngle) -> Result<JointDistribution> {
    let mut open = StateVector::zero(1)?;
    for (g, _) in interferometer_first_half(phi) {
        open = open.apply_gate(&g, &[0])?;
    }
    let closed = open.apply_gate(&Unitary::hadamard(), &[0])?;
    let p_open = open.probabilities(&[0])?;
    let p_closed = closed.probabilities(&[0])?;
    let (pb0, pb1) = (alpha.open_probability(), alpha.closed_probability());
    JointDistribution::new([[pb0 * p_open[0], pb1 * p_closed[0]], [pb0 * p_open[1], pb1 * p_closed[1]]])
}

/// Joint table when the ancilla is measured before BS₂ and its outcome
/// decides classically whether to apply the Hadamard.
pub fn measured_ancilla_joint(phi: PhaseAngle, alpha: BiasAngle) -> Result<JointDistribution> {
    let mut s = biased_ancilla_register(alpha)?;
    for (g, q) in interferometer_first_half(phi) {
        s = s.apply_gate(&g, &[q])?;
    }
    let p_b = s.probabilities(&[ANCILLA])?;
    let mut table = [[0.0; 2]; 2];
    for b in 0..2u8 {
        if p_b[b as usize] < EXACT_TOL {
            continue;
        }
        let mut branch = s.post_select(ANCILLA, b)?;
        if b == 1 {
            branch = branch.apply_gate(&Unitary::hadamard(), &[PHOTON])?;
        }
        let p_a = branch.probabilities(&[PHOTON])?;
        for a in 0..2 {
            table[a][b as usize] = p_b[b as usize] * p_a[a];
        }
    }
    JointDistribution::new(table)
}

/// Exact joint `p(a, b)` obtained by measuring two qubits one after the
/// other: the first qubit's Born probabilities times the second qubit's
/// probabilities in each collapsed branch.
pub fn sequential_joint(state: &StateVector, photon: usize, ancilla: usize, order: MeasurementOrder) -> Result<JointDistribution> {
    let (first, second) = match order {
        MeasurementOrder::PhotonFirst => (photon, ancilla),
        MeasurementOrder::AncillaFirst => (ancilla, photon),
    };
    let p_first = state.probabilities(&[first])?;
    let mut table = [[0.0; 2]; 2];
    for o1 in 0..2u8 {
        if p_first[o1 as usize] < EXACT_TOL {
            continue;
        }
        let p_second = state.post_select(first, o1)?.probabilities(&[second])?;
        for o2 in 0..2 {
            let p = p_first[o1 as usize] * p_second[o2];
            match order {
                MeasurementOrder::PhotonFirst => table[o1 as usize][o2] = p,
                MeasurementOrder::AncillaFirst => table[o2][o1 as usize] = p,
            }
        }
    }
    JointDistribution::new(table)
}

/// Compares classical control (random bit or measured ancilla) against
/// quantum control read out in either order.
pub fn deferred_measurement_check(phi: PhaseAngle, alpha: BiasAngle) -> Result<DeferredMeasurementReport> {
    let state = qdc_state(phi, alpha);
    let classical_qrng = classical_qrng_joint(phi, alpha)?;
    let measured_ancilla = measured_ancilla_joint(phi, alpha)?;
    let quantum_photon_first = sequential_joint(&state, PHOTON, ANCILLA, MeasurementOrder::PhotonFirst)?;
    let quantum_ancilla_first = sequential_joint(&state, PHOTON, ANCILLA, MeasurementOrder::AncillaFirst)?;
    let tables = [classical_qrng, measured_ancilla, quantum_photon_first, quantum_ancilla_first];
    let max_deviation = tables
        .iter()
        .flat_map(|a| tables.iter().map(move |b| a.max_abs_diff(b)))
        .fold(0.0, f64::max);
    Ok(DeferredMeasurementReport {
        phi: phi.0,
        alpha: alpha.0,
        classical_qrng,
        measured_ancilla,
        quantum_photon_first,
        quantum_ancilla_first,
        max_deviation,
        equivalent: max_deviation <= EXACT_TOL,
    })
}

/// Full record of the single-ancilla quantum-controlled experiment.
pub fn qdc_record(phi: PhaseAngle, alpha: BiasAngle, grid_points: usize) -> Result<ExperimentRecord> {
    let joint = JointDistribution::from_register_table(&qdc_state(phi, alpha).probabilities(&[PHOTON, ANCILLA])?)?;
    let conditional_patterns = [0u8, 1].map(|b| conditional_pattern(phi, alpha, b).ok());
    Ok(ExperimentRecord {
        label: "quantum-controlled".into(),
        phi: phi.0,
        alpha: alpha.0,
        joint,
        conditional_patterns,
        visibility: visibility_summary(alpha, grid_points)?,
    })
}

fn visibility_summary(alpha: BiasAngle, grid_points: usize) -> Result<VisibilitySummary> {
    let branch = |b: u8| -> Result<Option<f64>> {
        let pb = if b == 0 { alpha.open_probability() } else { alpha.closed_probability() };
        if pb < EXACT_TOL {
            return Ok(None);
        }
        visibility_numeric(|phi| conditional_pattern(phi, alpha, b).unwrap_or(f64::NAN), grid_points).map(Some)
    };
    Ok(VisibilitySummary {
        analytic: visibility_analytic(alpha),
        unconditioned: visibility_numeric(|phi| simulated_intensity(phi, alpha), grid_points)?,
        particle_branch: branch(0)?,
        wave_branch: branch(1)?,
    })
}

/// Three-qubit register after the entanglement-assisted circuit: control
/// and herald prepared in `(|00⟩+|11⟩)/√2`, photon through BS₁ and the phase,
/// controlled-H from the control qubit, and the bias rotation `Ry(−2α)` on
/// the herald. Reading the herald as 0 leaves the control in
/// `cos α|0⟩ + sin α|1⟩`.
pub fn entangled_state(phi: PhaseAngle, alpha: BiasAngle, bias_first: bool) -> Result<StateVector> {
    let bias = Unitary::ry(-2.0 * alpha.0);
    let mut s = StateVector::zero(3)?
        .apply_gate(&Unitary::hadamard(), &[ANCILLA])?
        .apply_gate(&Unitary::cnot(), &[HERALD, ANCILLA])?;
    if bias_first {
        s = s.apply_gate(&bias, &[HERALD])?;
    }
    for (g, q) in interferometer_first_half(phi) {
        s = s.apply_gate(&g, &[q])?;
    }
    s = s.apply_gate(&controlled(&Unitary::hadamard()), &[PHOTON, ANCILLA])?;
    if !bias_first {
        s = s.apply_gate(&bias, &[HERALD])?;
    }
    Ok(s)
}

/// Runs the entanglement-assisted circuit and compares its heralded
/// photon/control statistics against the single-ancilla experiment.
pub fn entangled_variant(phi: PhaseAngle, alpha: BiasAngle, grid_points: usize) -> Result<EntangledVariantRecord> {
    let state = entangled_state(phi, alpha, false)?;
    let reordered = entangled_state(phi, alpha, true)?;
    let full = state.probabilities(&[PHOTON, ANCILLA, HERALD])?;
    let full_reordered = reordered.probabilities(&[PHOTON, ANCILLA, HERALD])?;
    let bias_order_deviation = full.iter().zip(&full_reordered).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let herald_probability = state.outcome_probability(HERALD, 0)?;
    let heralded = state.post_select(HERALD, 0)?;
    let joint = JointDistribution::from_register_table(&heralded.probabilities(&[PHOTON, ANCILLA])?)?;
    let photon_herald_joint = JointDistribution::from_register_table(&state.probabilities(&[PHOTON, HERALD])?)?;
    let unheralded_joint = JointDistribution::from_register_table(&state.probabilities(&[PHOTON, ANCILLA])?)?;
    let reference = JointDistribution::from_register_table(&qdc_state(phi, alpha).probabilities(&[PHOTON, ANCILLA])?)?;
    let max_deviation = joint.max_abs_diff(&reference);

    let conditional_patterns = [0usize, 1].map(|b| joint.conditional_on_ancilla(b).map(|p| p[1]));
    Ok(EntangledVariantRecord {
        record: ExperimentRecord {
            label: "entanglement-assisted (herald = 0)".into(),
            phi: phi.0,
            alpha: alpha.0,
            joint,
            conditional_patterns,
            visibility: visibility_summary(alpha, grid_points)?,
        },
        herald_probability,
        photon_herald_joint,
        unheralded_joint,
        reference,
        max_deviation,
        bias_order_deviation,
        equivalent: max_deviation <= EXACT_TOL && bias_order_deviation <= EXACT_TOL,
    })
}

/// The bias slices `−π/2, −3π/8, …, π/2`.
pub fn default_alpha_grid() -> Vec<BiasAngle> {
    (-4..=4).map(|k| BiasAngle(k as f64 * PI / 8.0)).collect()
}

/// `[0, 2π)` in steps of `π/64`.
pub fn default_phi_grid() -> Vec<PhaseAngle> {
    (0..128).map(|k| PhaseAngle(k as f64 * PI / 64.0)).collect()
}
