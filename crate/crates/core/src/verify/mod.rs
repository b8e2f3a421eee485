//! Dense Fock-space reference implementation.
//!
//! Everything here works with explicit `2^L`-dimensional vectors and
//! matrices in the Jordan–Wigner basis and is meant for small systems only.
//! The test suites and the `oracle-compare` command check the covariance
//! calculus against it.

pub mod chain;
pub mod dense;
pub mod fock;
pub mod random;
pub mod suite;
pub mod twirl;

pub use dense::{
    dense_covariance, dense_fidelity, dense_from_covariance, dense_moment, dense_parity_probabilities, DenseState,
    ParityProbabilities,
};
pub use fock::{dense_operators, FockSpace};
pub use suite::{oracle_suite, OracleReport};
pub use twirl::{dense_twirl, dense_twirl_sampled};
