//! One-time memories from conjugate coding and stateless hardware tokens.
//!
//! The crate simulates the honest protocol, the ideal one-time memory and its
//! simulator, runs the known attacks against both the classical-query token and
//! measure-and-access memories, and checks the semidefinite-programming
//! witnesses that bound any attacker's chance of extracting both secrets.

pub mod adversaries;
pub mod bits;
pub mod bounds;
pub mod error;
pub mod protocol;
pub mod quantum;
pub mod rng;
pub mod token;

pub use bits::{BB84Key, Basis, BasisString, BitString};
pub use error::{Error, Result};
pub use quantum::{DensityMatrix, HermitianOperator, QuantumKey, Statevector};
pub use rng::{SeedStream, TrialRng, DEFAULT_SEED};
