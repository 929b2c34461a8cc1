//! Graph-state certification toolkit.
//!
//! Builds the scalable Bell inequalities of arbitrary connected graphs,
//! evaluates them exactly or from sampled statistics on simulated (noisy)
//! states, estimates fidelities from measurable decompositions, and reports
//! device-independent self-testing verdicts.

pub mod bell;
pub mod certify;
pub mod fidelity;
pub mod format;
pub mod graph;
pub mod pauli;
pub mod sim;

pub use bell::{BellError, BellInequality, Bounds, MeasurementAssignment, Setting, StateFamily};
pub use certify::{
    noise_sweep, run_certification, self_test_verdict, CertificationReport, CertifyError,
    NoiseModel, NoiseSpec, ParameterGrid, Shots, Target, Verdict,
};
pub use fidelity::{FidelityDecomposition, FidelityError};
pub use graph::{Graph, GraphError, StabilizerGenerator};
pub use pauli::{Pauli, PauliString, PauliTerm};
pub use sim::{LocalObservable, QuantumState, StateError};
