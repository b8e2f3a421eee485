//! Entanglement distillation from bipartite fermionic Gaussian states.
//!
//! States are quasifree states of `d_A + d_B` fermionic modes given by their
//! Majorana covariance matrix ([`CovarianceMatrix`]). The pipeline in
//! [`distill::run_protocol`] brings a state to normal form by local
//! Bogolubov transformations, keeps the strongest mode pairs, reduces the
//! result to a twirl-invariant state and reports distillability and the
//! hashing rate. [`lattice`] builds the free-fermion chain input and sweeps
//! the block size. [`verify`] holds a dense Fock-space reference used by the
//! test suites and the `oracle-compare` command.

pub mod covariance;
pub mod distill;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod quasifree;
pub mod verify;

pub type Complex64 = nalgebra::Complex<f64>;

pub use covariance::{CovarianceMatrix, MajoranaKind, MajoranaLabel, Party, ValidationReport};
pub use distill::{run_protocol, DistillationReport, InvariantStateParams, CSV_HEADER};
pub use error::{Error, Result};
pub use lattice::{chain_covariance, rate_sweep, ChainSpec, KernelMethod, SweepConfig};
pub use linalg::{pfaffian, SkewMatrix};
pub use quasifree::{fidelity, normal_form, BasisProjection, NormalForm};
