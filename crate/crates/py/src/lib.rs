//! Python bindings. Structured results (records, reports) come back as
//! plain dicts and lists with the same layout as the CLI's JSON output.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use qcontrol::chsh::{bell_pair, quantum_controlled_chsh_on, ChshSettings};
use qcontrol::delayed_choice::{self as dc, BiasAngle, MeasurementOrder, PhaseAngle};
use qcontrol::hv::{self, GridConstraint, HvModel};
use qcontrol::quantum;
use serde::Serialize;

fn err(e: qcontrol::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Square unitary acting on `log2(dim)` qubits, row-major.
#[pyclass(name = "Unitary", module = "qcontrol_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyUnitary(quantum::Unitary);

#[pymethods]
impl PyUnitary {
    #[new]
    fn new(entries: Vec<Complex64>) -> PyResult<Self> {
        quantum::Unitary::new(entries).map(Self).map_err(err)
    }

    #[staticmethod]
    fn hadamard() -> Self {
        Self(quantum::Unitary::hadamard())
    }

    #[staticmethod]
    fn pauli_x() -> Self {
        Self(quantum::Unitary::pauli_x())
    }

    #[staticmethod]
    fn phase(phi: f64) -> Self {
        Self(quantum::Unitary::phase(phi))
    }

    #[staticmethod]
    fn ry(theta: f64) -> Self {
        Self(quantum::Unitary::ry(theta))
    }

    #[staticmethod]
    fn cnot() -> Self {
        Self(quantum::Unitary::cnot())
    }

    /// `diag(I, U)`; the control is the last target when applied.
    fn controlled(&self) -> Self {
        Self(quantum::controlled(&self.0))
    }

    fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn entries(&self) -> Vec<Complex64> {
        self.0.entries().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Unitary(dim={})", self.0.dim())
    }
}

/// Dense little-endian state vector: qubit `i` is bit `i` of the basis label.
#[pyclass(name = "StateVector", module = "qcontrol_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyStateVector(quantum::StateVector);

#[pymethods]
impl PyStateVector {
    #[new]
    fn new(amplitudes: Vec<Complex64>) -> PyResult<Self> {
        quantum::StateVector::from_amplitudes(amplitudes).map(Self).map_err(err)
    }

    #[staticmethod]
    fn zero(n_qubits: usize) -> PyResult<Self> {
        quantum::StateVector::zero(n_qubits).map(Self).map_err(err)
    }

    #[staticmethod]
    fn basis(n_qubits: usize, label: usize) -> PyResult<Self> {
        quantum::StateVector::basis(n_qubits, label).map(Self).map_err(err)
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().to_vec()
    }

    fn apply_gate(&self, gate: &PyUnitary, targets: Vec<usize>) -> PyResult<Self> {
        self.0.apply_gate(&gate.0, &targets).map(Self).map_err(err)
    }

    fn tensor(&self, upper: &PyStateVector) -> PyResult<Self> {
        self.0.tensor(&upper.0).map(Self).map_err(err)
    }

    fn inner(&self, other: &PyStateVector) -> PyResult<Complex64> {
        self.0.inner(&other.0).map_err(err)
    }

    fn fidelity(&self, other: &PyStateVector) -> PyResult<f64> {
        self.0.fidelity(&other.0).map_err(err)
    }

    /// Joint outcome probabilities, indexed little-endian over `qubits` in the order given.
    fn probabilities(&self, qubits: Vec<usize>) -> PyResult<Vec<f64>> {
        self.0.probabilities(&qubits).map_err(err)
    }

    /// Projective measurement; returns `(bit, probability, post_state)`.
    fn measure(&self, qubit: usize, seed: u64) -> PyResult<(u8, f64, Self)> {
        let mut rng = qcontrol::rng::seeded(seed);
        let o = self.0.measure(qubit, &mut rng).map_err(err)?;
        Ok((o.bit, o.probability, Self(o.post_state)))
    }

    fn post_select(&self, qubit: usize, outcome: u8) -> PyResult<Self> {
        self.0.post_select(qubit, outcome).map(Self).map_err(err)
    }

    /// Eigenvalues of the reduced density matrix on `keep`.
    fn reduced_spectrum(&self, keep: Vec<usize>) -> PyResult<Vec<f64>> {
        Ok(self.0.partial_trace(&keep).map_err(err)?.eigenvalues())
    }

    fn __repr__(&self) -> String {
        format!("StateVector(n_qubits={})", self.0.n_qubits())
    }
}

/// Photon click probability `½cos²α + sin²(φ/2)sin²α`.
#[pyfunction]
fn intensity(phi: f64, alpha: f64) -> f64 {
    dc::intensity(PhaseAngle(phi), BiasAngle(alpha))
}

/// Click probability read off the simulated circuit.
#[pyfunction]
fn simulated_intensity(phi: f64, alpha: f64) -> f64 {
    dc::simulated_intensity(PhaseAngle(phi), BiasAngle(alpha))
}

#[pyfunction]
fn visibility_analytic(alpha: f64) -> f64 {
    dc::visibility_analytic(BiasAngle(alpha))
}

#[pyfunction]
fn qdc_state(phi: f64, alpha: f64) -> PyStateVector {
    PyStateVector(dc::qdc_state(PhaseAngle(phi), BiasAngle(alpha)))
}

/// `[(phi, alpha, intensity), ...]` in α-major order.
#[pyfunction]
fn morphing_sweep(phis: Vec<f64>, alphas: Vec<f64>) -> Vec<(f64, f64, f64)> {
    let phis: Vec<_> = phis.into_iter().map(PhaseAngle).collect();
    let alphas: Vec<_> = alphas.into_iter().map(BiasAngle).collect();
    dc::morphing_sweep(&phis, &alphas).into_iter().map(|p| (p.phi.0, p.alpha.0, p.intensity)).collect()
}

#[pyfunction]
fn sample_clicks(phi: f64, alpha: f64, shots: u64, seed: u64) -> PyResult<u64> {
    let mut rng = qcontrol::rng::seeded(seed);
    dc::sample_clicks(PhaseAngle(phi), BiasAngle(alpha), shots, &mut rng).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (phi, alpha, grid_points = dc::DEFAULT_VISIBILITY_GRID))]
fn qdc_record(py: Python<'_>, phi: f64, alpha: f64, grid_points: usize) -> PyResult<Py<PyAny>> {
    to_py(py, &dc::qdc_record(PhaseAngle(phi), BiasAngle(alpha), grid_points).map_err(err)?)
}

/// Joint table `[[p(a,b)]]` from reading the quantum-controlled circuit in the given order.
#[pyfunction]
#[pyo3(signature = (phi, alpha, ancilla_first = false))]
fn qdc_joint(phi: f64, alpha: f64, ancilla_first: bool) -> PyResult<[[f64; 2]; 2]> {
    let order = if ancilla_first { MeasurementOrder::AncillaFirst } else { MeasurementOrder::PhotonFirst };
    let state = dc::qdc_state(PhaseAngle(phi), BiasAngle(alpha));
    Ok(dc::sequential_joint(&state, dc::PHOTON, dc::ANCILLA, order).map_err(err)?.table)
}

#[pyfunction]
fn deferred_measurement_check(py: Python<'_>, phi: f64, alpha: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &dc::deferred_measurement_check(PhaseAngle(phi), BiasAngle(alpha)).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (phi, alpha, grid_points = dc::DEFAULT_VISIBILITY_GRID))]
fn entangled_variant(py: Python<'_>, phi: f64, alpha: f64, grid_points: usize) -> PyResult<Py<PyAny>> {
    to_py(py, &dc::entangled_variant(PhaseAngle(phi), BiasAngle(alpha), grid_points).map_err(err)?)
}

/// `[r1, r2, r3]` for the hidden-variable model `(f, x, y, z, v)`.
#[pyfunction]
fn adequacy_residuals(f: f64, x: f64, y: f64, z: f64, v: f64, phi: f64, alpha: f64) -> PyResult<[f64; 3]> {
    let m = HvModel::new(f, x, y, z, v, PhaseAngle(phi), BiasAngle(alpha)).map_err(err)?;
    Ok(hv::adequacy_residuals(&m))
}

#[pyfunction]
fn hv_joint(f: f64, x: f64, y: f64, z: f64, v: f64, phi: f64, alpha: f64) -> PyResult<[[f64; 2]; 2]> {
    let m = HvModel::new(f, x, y, z, v, PhaseAngle(phi), BiasAngle(alpha)).map_err(err)?;
    Ok(hv::hv_joint(&m).map_err(err)?.table)
}

#[pyfunction]
fn quantum_joint(phi: f64, alpha: f64) -> [[f64; 2]; 2] {
    hv::quantum_joint(PhaseAngle(phi), BiasAngle(alpha)).table
}

#[pyfunction]
fn solution_families(py: Python<'_>, phi: f64, alpha: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &hv::enumerate_solution_families(PhaseAngle(phi), BiasAngle(alpha)))
}

#[pyfunction]
fn classical_control_analysis(py: Python<'_>, phi: f64, alpha: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &hv::classical_control_analysis(PhaseAngle(phi), BiasAngle(alpha)).map_err(err)?)
}

/// Adequate points of the `1/steps` grid as `(f, x, y, z, v)` tuples.
#[pyfunction]
#[pyo3(signature = (phi, alpha, steps, v_equals_z = false))]
fn grid_search(phi: f64, alpha: f64, steps: usize, v_equals_z: bool) -> Vec<(f64, f64, f64, f64, f64)> {
    let constraint = if v_equals_z { GridConstraint::VEqualsZ } else { GridConstraint::None };
    hv::grid_search(PhaseAngle(phi), BiasAngle(alpha), steps, constraint)
        .adequate
        .into_iter()
        .map(|m| (m.f, m.x, m.y, m.z, m.v))
        .collect()
}

#[pyfunction]
#[pyo3(signature = (a, a_prime, b, b_prime, bias_alice = std::f64::consts::FRAC_PI_4, bias_bob = std::f64::consts::FRAC_PI_4, separable = false))]
#[allow(clippy::too_many_arguments)]
fn chsh(
    py: Python<'_>,
    a: f64,
    a_prime: f64,
    b: f64,
    b_prime: f64,
    bias_alice: f64,
    bias_bob: f64,
    separable: bool,
) -> PyResult<Py<PyAny>> {
    let pair = if separable { quantum::StateVector::zero(2).map_err(err)? } else { bell_pair() };
    let settings = ChshSettings::new(a, a_prime, b, b_prime);
    let result =
        quantum_controlled_chsh_on(&pair, &settings, BiasAngle(bias_alice), BiasAngle(bias_bob)).map_err(err)?;
    to_py(py, &result)
}

#[pymodule]
fn qcontrol_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyUnitary>()?;
    m.add_class::<PyStateVector>()?;
    m.add("MAX_QUBITS", quantum::MAX_QUBITS)?;
    m.add_function(wrap_pyfunction!(intensity, m)?)?;
    m.add_function(wrap_pyfunction!(simulated_intensity, m)?)?;
    m.add_function(wrap_pyfunction!(visibility_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(qdc_state, m)?)?;
    m.add_function(wrap_pyfunction!(morphing_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sample_clicks, m)?)?;
    m.add_function(wrap_pyfunction!(qdc_record, m)?)?;
    m.add_function(wrap_pyfunction!(qdc_joint, m)?)?;
    m.add_function(wrap_pyfunction!(deferred_measurement_check, m)?)?;
    m.add_function(wrap_pyfunction!(entangled_variant, m)?)?;
    m.add_function(wrap_pyfunction!(adequacy_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(hv_joint, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_joint, m)?)?;
    m.add_function(wrap_pyfunction!(solution_families, m)?)?;
    m.add_function(wrap_pyfunction!(classical_control_analysis, m)?)?;
    m.add_function(wrap_pyfunction!(grid_search, m)?)?;
    m.add_function(wrap_pyfunction!(chsh, m)?)?;
    Ok(())
}
