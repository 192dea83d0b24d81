//! n-fold parallel repetition of the witnesses.
//!
//! `A′`, `X′` and `I ⊗ Y` are all diagonal in the computational basis of the two
//! key registers. After grouping the `2n` key qubits ahead of the `n` input
//! qubits, their tensor powers are block diagonal with one `2^n × 2^n` block per
//! key string, so feasibility of `(X′)^{⊗n}` and `Y^{⊗n}` reduces to `4^n` small
//! checks. [`tensor_check_dense`] does the same check on the full interleaved
//! matrices for small `n`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::sdp::WITNESS_TOL;
use crate::error::{Error, Result};
use crate::quantum::{HermitianOperator, C64};

/// Feasibility and objective values of the n-fold witnesses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorCheck {
    pub n: u32,
    pub primal_value: f64,
    pub dual_value: f64,
    /// Smallest eigenvalue of `(X′)^{⊗n}`.
    pub primal_min_eigenvalue: f64,
    /// `‖Tr_Q (X′)^{⊗n} − I‖_max`.
    pub trace_residual: f64,
    /// Smallest eigenvalue of `I ⊗ Y^{⊗n} − (A′)^{⊗n}`.
    pub dual_min_slack: f64,
    pub satisfied: bool,
}

impl TensorCheck {
    fn new(n: u32, primal_value: f64, dual_value: f64, primal_min: f64, residual: f64, dual_min: f64) -> Self {
        let satisfied = primal_min >= -WITNESS_TOL
            && residual <= WITNESS_TOL
            && dual_min >= -WITNESS_TOL
            && (primal_value - dual_value).abs() <= WITNESS_TOL;
        Self {
            n,
            primal_value,
            dual_value,
            primal_min_eigenvalue: primal_min,
            trace_residual: residual,
            dual_min_slack: dual_min,
            satisfied,
        }
    }
}

/// The 2×2 input block of an 8×8 operator at key value `k ∈ 0..4`; errors if
/// the operator couples different key values.
fn key_blocks(op: &HermitianOperator, what: &str) -> Result<[DMatrix<C64>; 4]> {
    let m = op.matrix();
    for i in 0..8 {
        for j in 0..8 {
            if i / 2 != j / 2 && m[(i, j)].norm() > WITNESS_TOL {
                return Err(Error::InvalidArgument(format!("{what} is not block diagonal in the key registers")));
            }
        }
    }
    Ok([0, 1, 2, 3].map(|k| m.view((2 * k, 2 * k), (2, 2)).into_owned()))
}

fn min_eig(m: DMatrix<C64>) -> f64 {
    HermitianOperator::new((&m + m.adjoint()) * C64::new(0.5, 0.0)).expect("symmetrized").min_eigenvalue()
}

/// Block-structured check of `(X′)^{⊗n}` against `(A′)^{⊗n}` and `Y^{⊗n}`.
pub fn tensor_check_blocks(
    a_prime: &HermitianOperator,
    x_prime: &HermitianOperator,
    y: &HermitianOperator,
    n: u32,
) -> Result<TensorCheck> {
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power must be at least 1".into()));
    }
    let a_blocks = key_blocks(a_prime, "A'")?;
    let x_blocks = key_blocks(x_prime, "X'")?;
    let y_n = (1..n).fold(y.matrix().clone(), |acc, _| acc.kronecker(y.matrix()));
    let dim = 1usize << n;

    let mut primal_value = 0.0;
    let mut primal_min = f64::INFINITY;
    let mut dual_min = f64::INFINITY;
    let mut traced = DMatrix::<C64>::zeros(dim, dim);
    for key in 0..4usize.pow(n) {
        // digit i (most significant first) is the key value of copy i
        let digits: Vec<usize> = (0..n).rev().map(|i| (key >> (2 * i)) & 3).collect();
        let x_block = digits[1..].iter().fold(x_blocks[digits[0]].clone(), |acc, &d| acc.kronecker(&x_blocks[d]));
        let a_block = digits[1..].iter().fold(a_blocks[digits[0]].clone(), |acc, &d| acc.kronecker(&a_blocks[d]));
        primal_value += (&x_block * &a_block).trace().re;
        if x_block.iter().any(|v| v.norm() > 0.0) {
            primal_min = primal_min.min(min_eig(x_block.clone()));
        } else {
            primal_min = primal_min.min(0.0);
        }
        traced += &x_block;
        dual_min = dual_min.min(min_eig(&y_n - &a_block));
    }
    let residual = (traced - DMatrix::<C64>::identity(dim, dim)).camax();
    let dual_value = y_n.trace().re;
    Ok(TensorCheck::new(n, primal_value, dual_value, primal_min, residual, dual_min))
}

/// The same check on the dense interleaved operators (dimension `8^n`).
pub fn tensor_check_dense(
    a_prime: &HermitianOperator,
    x_prime: &HermitianOperator,
    y: &HermitianOperator,
    n: u32,
) -> Result<TensorCheck> {
    if n == 0 || n > 3 {
        return Err(Error::InvalidSize(format!("dense tensor check supports 1 ≤ n ≤ 3, got {n}")));
    }
    let power = |op: &HermitianOperator| (1..n).fold(op.clone(), |acc, _| acc.kron(op));
    let x_n = power(x_prime);
    let a_n = power(a_prime);
    let lifted_y = power(&HermitianOperator::identity(4).kron(y));
    let y_n = power(y);
    let inputs: Vec<usize> = (0..n as usize).map(|i| 3 * i + 2).collect();
    let traced = x_n.partial_trace(&inputs)?;
    let residual = traced.max_abs_diff(&HermitianOperator::identity(1 << n));
    let dual_min = lifted_y.sub(&a_n)?.min_eigenvalue();
    Ok(TensorCheck::new(n, x_n.trace_product(&a_n), y_n.trace(), x_n.min_eigenvalue(), residual, dual_min))
}
