use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gate of dimension {gate_dim} cannot act on {targets} target qubit(s)")]
    DimensionMismatch { gate_dim: usize, targets: usize },

    #[error("qubit index {index} is out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("qubit index {0} appears more than once")]
    DuplicateQubit(usize),

    #[error("empty qubit selection")]
    EmptySelection,

    #[error("register of {0} qubits exceeds the supported maximum of {max}", max = crate::quantum::MAX_QUBITS)]
    TooManyQubits(usize),

    #[error("amplitude vector of length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("non-finite value encountered")]
    NonFinite,

    #[error("matrix is not unitary (max deviation of U·U† from I is {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not square: {rows} rows, {len} entries")]
    NotSquare { rows: usize, len: usize },

    #[error("outcome {outcome} on qubit {qubit} has probability {probability:e}; branch is impossible")]
    ImpossibleBranch { qubit: usize, outcome: u8, probability: f64 },

    #[error("outcome must be 0 or 1, got {0}")]
    InvalidOutcome(u8),

    #[error("invalid probability for {name}: {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("degenerate bias: cos²α = {0} (must lie strictly between 0 and 1)")]
    DegenerateBias(f64),

    #[error("degenerate pattern: I_max + I_min = {0:e}")]
    DegeneratePattern(f64),

    #[error("visibility grid needs at least {min} points, got {got}")]
    GridTooSmall { got: usize, min: usize },

    #[error("invalid hidden-variable theory: {0}")]
    InvalidTheory(String),

    #[error("incomplete assignment: expected {expected} setups, got {got}")]
    IncompleteAssignment { expected: usize, got: usize },

    #[error("correlator undefined: branch ({alice},{bob}) has probability {probability:e}")]
    UndefinedCorrelator { alice: u8, bob: u8, probability: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
