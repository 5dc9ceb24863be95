//! Sparse Fock-space simulation of post-selected linear-optics gates built
//! from polarizing beam splitters, with a small circuit language and a dense
//! reference simulator for cross-checking.

pub mod batch;
pub mod circuit;
pub mod fock;
pub mod gates;
pub mod optics;
pub mod oracle;
pub mod parallel;

pub use circuit::{
    execute, execute_with, parse_circuit, Acceptance, CircuitSpec, ExecOptions, GateResult,
    OutcomePattern,
};
pub use fock::{FockBasisState, Mode, PhotonState, Pol, PolBasis, PolSlot};
pub use gates::{Gate, GateInputs, GateReport, QubitState, TwoQubitState};
pub use parallel::Execution;

/// Crate version, reported in CLI output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
