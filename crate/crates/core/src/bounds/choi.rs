use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quantum::{partial_trace_matrix, HermitianOperator, C64, SPECTRAL_TOL};

/// Choi matrix `J(Φ) = Σ_ij Φ(|i⟩⟨j|) ⊗ |i⟩⟨j|`, output factor first.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    in_dim: usize,
    out_dim: usize,
    op: HermitianOperator,
}

impl ChoiMatrix {
    pub fn new(in_dim: usize, out_dim: usize, op: HermitianOperator) -> Result<Self> {
        if op.dim() != in_dim * out_dim {
            return Err(Error::InvalidSize(format!(
                "Choi matrix of dimension {} for a {in_dim}→{out_dim} map",
                op.dim()
            )));
        }
        Ok(Self { in_dim, out_dim, op })
    }

    /// Choi matrix of `ρ ↦ Σ_k K_k ρ K_k†`.
    pub fn from_kraus(kraus: &[DMatrix<C64>]) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidArgument("no Kraus operators".into()))?;
        let (out_dim, in_dim) = first.shape();
        if kraus.iter().any(|k| k.shape() != (out_dim, in_dim)) {
            return Err(Error::InvalidArgument("Kraus operators differ in shape".into()));
        }
        let mut j = DMatrix::<C64>::zeros(out_dim * in_dim, out_dim * in_dim);
        for k in kraus {
            for i in 0..in_dim {
                for l in 0..in_dim {
                    // Φ(|i⟩⟨l|) contributed by K: K[:, i] K[:, l]†
                    for a in 0..out_dim {
                        for b in 0..out_dim {
                            j[(a * in_dim + i, b * in_dim + l)] += k[(a, i)] * k[(b, l)].conj();
                        }
                    }
                }
            }
        }
        let j = (&j + j.adjoint()) * C64::new(0.5, 0.0);
        Self::new(in_dim, out_dim, HermitianOperator::new(j)?)
    }

    /// Measure-and-prepare channel: measure in the orthonormal basis `vectors`
    /// and write basis state `outputs[o]` of an `out_dim` register on outcome `o`.
    pub fn from_measurement(vectors: &[Vec<C64>], outputs: &[usize], out_dim: usize) -> Result<Self> {
        if vectors.len() != outputs.len() || outputs.iter().any(|&o| o >= out_dim) {
            return Err(Error::InvalidArgument("outcome labels do not match the basis".into()));
        }
        let kraus: Vec<DMatrix<C64>> = vectors
            .iter()
            .zip(outputs)
            .map(|(v, &o)| {
                DMatrix::from_fn(out_dim, v.len(), |a, i| if a == o { v[i].conj() } else { C64::new(0.0, 0.0) })
            })
            .collect();
        Self::from_kraus(&kraus)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    /// Complete positivity: `J ⪰ 0`.
    pub fn is_completely_positive(&self, tol: f64) -> bool {
        self.op.is_psd(tol)
    }

    /// `Tr_out J − I_in`, largest entry modulus.
    pub fn trace_preservation_residual(&self) -> Result<f64> {
        let out_qubits = self.out_dim.trailing_zeros() as usize;
        let in_qubits = self.in_dim.trailing_zeros() as usize;
        if !self.in_dim.is_power_of_two() || !self.out_dim.is_power_of_two() {
            return Err(Error::InvalidSize("registers must be qubits".into()));
        }
        let keep: Vec<usize> = (out_qubits..out_qubits + in_qubits).collect();
        let reduced = partial_trace_matrix(self.op.matrix(), &keep)?;
        Ok((reduced - DMatrix::<C64>::identity(self.in_dim, self.in_dim)).camax())
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_residual().is_ok_and(|r| r <= tol)
    }

    /// Both channel predicates at the spectral tolerance.
    pub fn is_valid_channel(&self) -> bool {
        self.is_completely_positive(SPECTRAL_TOL) && self.is_trace_preserving(SPECTRAL_TOL)
    }

    /// `Φ(ρ) = Tr_in[J (I ⊗ ρᵀ)]`.
    pub fn apply(&self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if rho.shape() != (self.in_dim, self.in_dim) {
            return Err(Error::InvalidSize("input has the wrong dimension".into()));
        }
        let j = self.op.matrix();
        Ok(DMatrix::from_fn(self.out_dim, self.out_dim, |a, b| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..self.in_dim {
                for l in 0..self.in_dim {
                    acc += j[(a * self.in_dim + i, b * self.in_dim + l)] * rho[(i, l)];
                }
            }
            acc
        }))
    }
}
