//! Exact finite-dimensional quantum mechanics for small registers.
//!
//! Conventions used throughout: qubit 0 is the most significant bit of every
//! basis index, and Kronecker products place the left factor on the leading
//! qubits.

mod operator;
mod register;
mod state;

pub use num_complex::Complex64 as C64;

pub use operator::{eig_hermitian, is_psd, partial_trace_matrix, DensityMatrix, HermitianOperator, Spectrum};
pub use register::{ProductState, QuantumKey, DENSE_KEY_LIMIT};
pub(crate) use state::rotation_to_computational;
pub use state::{bb84_qubit, hadamard, prepare_bb84, rotated_basis_vector, Gate1, Statevector};

/// Largest register a dense statevector may hold.
pub const MAX_STATEVECTOR_QUBITS: usize = 20;
/// Largest register a [`DensityMatrix`] may hold.
pub const MAX_DENSITY_QUBITS: usize = 6;
/// Normalization and unitarity tolerance.
pub const NORM_TOL: f64 = 1e-12;
/// Hermiticity tolerance.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Spectral and PSD tolerance.
pub const SPECTRAL_TOL: f64 = 1e-10;

#[cfg(test)]
mod tests;
