//! Resource estimation for surface-code lattice-surgery computation.
//!
//! Two compilation families are modelled: sequential Pauli-based
//! computation as closed-form formulas ([`spbc`]), and direct Clifford+T
//! compilation onto a tile layout ([`compiler`]) with min-storage magic
//! state scheduling ([`magic`]). [`estimate`] turns either into
//! fault-tolerant resource estimates under an error budget.

pub mod calibration;
pub mod circuit;
pub mod compiler;
pub mod estimate;
pub mod fit;
pub mod layout;
pub mod magic;
pub mod random;
pub mod replay;
pub mod scaling;
pub mod spbc;

pub use calibration::Calibration;
pub use circuit::{compute_lre, parse_circuit, CircuitSummary, Gate, GateKind, LogicalCircuit};
pub use compiler::{compile, compile_with, CompilationResult, CompileError, CompilerConfig};
pub use estimate::{optimize_distances, AlgorithmSpec, EstimateError, FtreReport, Models, Scheme};
pub use layout::{plan_layout, Layout, LayoutKind};
pub use magic::{min_storage_schedule, ConsumptionProfile, FactoryModel, FactorySpec};
