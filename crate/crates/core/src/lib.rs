//! Simulation of free-electron circuits: spinful fermionic modes driven by
//! single-particle optics (beam splitters, polarizing beam splitters, spin
//! rotations), read out by electrometers, parity meters, and spin detectors,
//! with classical feedforward.
//!
//! Two backends are provided. [`fock`] keeps the exact second-quantized state
//! and supports every operation. [`corr`] tracks the two-point correlation
//! matrix of a Gaussian state, which is polynomial in the number of modes but
//! only supports occupation-number measurements; charge-1 probabilities cost
//! a sum over exponentially many determinants.

pub mod circuit;
pub mod corr;
pub mod dsl;
pub mod error;
pub mod exec;
pub mod fock;
pub mod gadgets;
pub mod matrix;
pub mod measurement;
pub mod mode;
pub mod parallel;
pub mod report;

pub use circuit::{Axis, Circuit, DiagCode, Gate, Instruction, MeasureKind, Prep, Spinor};
pub use corr::{CorrBackend, CorrelationMatrix};
pub use error::{FeqcError, Result};
pub use exec::{enumerate_branches, sample, Backend, BranchRecord, FockBackend, Outcomes};
pub use fock::FockState;
pub use mode::{ModeIndex, OccupationKey, Spin};
pub use parallel::Parallelism;
