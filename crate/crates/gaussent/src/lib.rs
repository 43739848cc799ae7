//! Gaussian multimode states, mode partitions, and entanglement witnesses.
//!
//! The crate builds covariance matrices of Gaussian states (analytically or by
//! running symplectic circuits with loss), enumerates mode partitions, and
//! evaluates three entanglement criteria per partition: a quantum Fisher
//! information witness, a multi-mode squeezing coefficient, and the PPT
//! symplectic-eigenvalue test.

pub mod circuit;
pub mod criteria;
pub mod error;
pub mod partition;
pub mod reconstruct;
pub mod states;
pub mod symplectic;

pub use circuit::{CircuitElement, GaussianCircuit};
pub use criteria::{Criterion, CriterionResult, SearchConfig};
pub use error::{Error, Result};
pub use partition::{ModePartition, PartitionClass};
pub use states::{StateFamily, StateSpec};
pub use symplectic::{CovarianceMatrix, PhaseSpaceDirection, Physicality, SymplecticForm};
