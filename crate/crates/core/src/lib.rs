//! Cranked Nilsson + pairing Routhian simulator.
//!
//! Builds a deformed single-particle spectrum, selects an active window around
//! the Fermi surface, maps the cranked pairing Routhian to qubits and minimizes
//! it with a structured number-conserving ansatz. A cranked-BCS baseline and an
//! exact fixed-N diagonalization serve as references.

pub mod active_space;
pub mod angular;
pub mod bcs;
pub mod ansatz;
pub mod error;
pub mod fermion;
pub mod nilsson;
pub mod observables;
pub mod optimize;
pub mod oracle;
pub mod pauli;
pub mod routhian;
pub mod scan;
pub mod sector;
pub mod statevector;
pub mod vqe;

pub use active_space::{select_window, ActiveSpace, Species};
pub use ansatz::{build_graph, AnsatzProgram, CompiledAnsatz, ExcitationGraph, Gate};
pub use error::{Error, Result};
pub use fermion::{jordan_wigner, FermionOperator};
pub use nilsson::{diagonalize, jx_matrix, NilssonLevel, NilssonParams};
pub use optimize::{LbfgsbSettings, Objective};
pub use pauli::{pauli_matrix, PauliString, PauliSum};
pub use routhian::{build_routhian, RouthianSpec, DEFAULT_G, DEFAULT_LAMBDA_P};
pub use scan::{run_scan, ScanConfig, ScanOutput, ScanRecord};
pub use sector::{FixedNSector, SectorGate, SectorOperator};
pub use statevector::StateVector;
pub use vqe::{OptimizerSettings, VqeResult};
