//! Dense state-vector simulation for registers of up to [`MAX_QUBITS`] qubits.
//!
//! Qubit ordering is little-endian throughout: qubit `i` is bit `i` of a
//! basis-state label. All operations return new values.

mod density;
mod gates;
mod state;

pub use density::{DensityMatrix, EIGEN_TOL};
pub use gates::{controlled, Unitary};
pub use state::{MeasurementOutcome, StateVector};

pub type Amplitude = num_complex::Complex64;

pub const MAX_QUBITS: usize = 12;

/// Tolerance for identities that hold exactly in real arithmetic.
pub const EXACT_TOL: f64 = 1e-12;

/// Tolerance for iterated or accumulated computations.
pub const ACCUM_TOL: f64 = 1e-9;
