//! Dense state-vector and density-matrix simulation.

mod observable;
mod sampling;
mod state;

use thiserror::Error;

pub use observable::{gates, LocalObservable, Matrix2};
pub use sampling::{born_sample, derive_seed, seeded_rng, Estimate, OutcomeCounts, Tally};
pub use state::{QuantumState, MAX_MIXED_QUBITS, MAX_PURE_QUBITS};

pub(crate) use state::check_permutation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("{n} qubits exceeds the cap of {cap} for this representation")]
    SizeCap { n: usize, cap: usize },
    #[error("{what} is not defined for {n} qubits")]
    UnsupportedSize { n: usize, what: &'static str },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("qubit {qubit} out of range 1..={n}")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("matrix is not unitary")]
    NonUnitary,
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("{name} {value} outside [0, 1]")]
    ParameterOutOfRange { name: &'static str, value: f64 },
    #[error("Bloch vector {0:?} is not a unit vector")]
    NotUnitVector([f64; 3]),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("shot count must be positive")]
    ZeroShots,
    #[error("state JSON: {0}")]
    Json(String),
}
