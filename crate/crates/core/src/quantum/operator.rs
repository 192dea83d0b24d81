use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{Statevector, C64, HERMITIAN_TOL, MAX_DENSITY_QUBITS, NORM_TOL, SPECTRAL_TOL};
use crate::error::{Error, Result};

/// A square matrix equal to its conjugate transpose within `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: DMatrix<C64>,
}

/// Eigen-decomposition with eigenvalues in ascending order. `vectors[i]` belongs
/// to `values[i]`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<C64>>,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `Σ λᵢ vᵢvᵢ†`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let dim = self.values.len();
        let mut out = DMatrix::zeros(dim, dim);
        for (&l, v) in self.values.iter().zip(&self.vectors) {
            out += v * v.adjoint() * C64::new(l, 0.0);
        }
        out
    }
}

impl HermitianOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "{}×{} matrix is not a non-empty square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let deviation = hermitian_deviation(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { matrix })
    }

    /// Build from a real symmetric matrix given row by row.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("rows are not square".into()));
        }
        Self::new(DMatrix::from_fn(dim, dim, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: DMatrix::zeros(dim, dim) }
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        let col = DVector::from_column_slice(v);
        Self { matrix: &col * col.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr(self · other)`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &HermitianOperator) -> f64 {
        // Tr(AB) = Σ_ij A_ij B_ji
        self.matrix.iter().zip(other.matrix.transpose().iter()).map(|(a, b)| (a * b).re).sum()
    }

    pub fn kron(&self, other: &HermitianOperator) -> HermitianOperator {
        Self { matrix: self.matrix.kronecker(&other.matrix) }
    }

    pub fn scale(&self, factor: f64) -> HermitianOperator {
        Self { matrix: &self.matrix * C64::new(factor, 0.0) }
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        self.check_same_dim(other)?;
        Ok(Self { matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        self.check_same_dim(other)?;
        Ok(Self { matrix: &self.matrix - &other.matrix })
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        self.matrix.iter().zip(other.matrix.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn eigen(&self) -> Spectrum {
        let dim = self.dim();
        let mut values = Vec::with_capacity(dim);
        let mut vectors = Vec::with_capacity(dim);
        // Diagonalize each decoupled block separately. Besides being cheaper for
        // the sparse operators used here, this sidesteps NaNs that nalgebra's
        // implicit QR produces on large matrices made of many exact zero blocks.
        for block in self.coupled_blocks() {
            let sub = DMatrix::from_fn(block.len(), block.len(), |i, j| self.matrix[(block[i], block[j])]);
            let eig = SymmetricEigen::new(sub);
            for (k, &value) in eig.eigenvalues.iter().enumerate() {
                let mut v = DVector::<C64>::zeros(dim);
                for (i, &row) in block.iter().enumerate() {
                    v[row] = eig.eigenvectors[(i, k)];
                }
                values.push(value);
                vectors.push(v);
            }
        }
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        Spectrum {
            values: order.iter().map(|&i| values[i]).collect(),
            vectors: order.iter().map(|&i| vectors[i].clone()).collect(),
        }
    }

    /// Index sets of the connected components of the non-zero pattern.
    fn coupled_blocks(&self) -> Vec<Vec<usize>> {
        let dim = self.dim();
        let mut parent: Vec<usize> = (0..dim).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..dim {
            for j in i + 1..dim {
                if self.matrix[(i, j)] != C64::new(0.0, 0.0) {
                    let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut index_of = vec![usize::MAX; dim];
        for i in 0..dim {
            let r = root(&mut parent, i);
            if index_of[r] == usize::MAX {
                index_of[r] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[index_of[r]].push(i);
        }
        blocks
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().min()
    }

    /// True iff the smallest eigenvalue is at least `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.eigen().values.iter().filter(|&&l| l.abs() > tol).count()
    }

    /// Trace out every qubit not listed in `keep`. The operator must act on qubits
    /// (dimension `2^n`); kept qubits retain their relative order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<HermitianOperator> {
        partial_trace_matrix(&self.matrix, keep).map(|matrix| Self { matrix })
    }

    fn check_same_dim(&self, other: &HermitianOperator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidArgument(format!("dimension mismatch: {} vs {}", self.dim(), other.dim())));
        }
        Ok(())
    }
}

/// Eigen-decomposition of an arbitrary square matrix that must be Hermitian.
pub fn eig_hermitian(matrix: &DMatrix<C64>) -> Result<Spectrum> {
    match HermitianOperator::new(matrix.clone()) {
        Ok(op) => Ok(op.eigen()),
        Err(Error::NotHermitian { deviation }) => {
            Err(Error::InvalidArgument(format!("matrix is not Hermitian (deviation {deviation:e})")))
        }
        Err(e) => Err(e),
    }
}

pub fn is_psd(op: &HermitianOperator, tol: f64) -> bool {
    op.is_psd(tol)
}

fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Partial trace on a raw `2^n × 2^n` matrix, keeping the qubits in `keep`.
pub fn partial_trace_matrix(matrix: &DMatrix<C64>, keep: &[usize]) -> Result<DMatrix<C64>> {
    let dim = matrix.nrows();
    if !matrix.is_square() || dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidSize(format!("dimension {dim} is not 2^n")));
    }
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep-set is empty".into()));
    }
    let n = dim.trailing_zeros() as usize;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&q| q >= n) {
        return Err(Error::InvalidArgument(format!("invalid keep-set {keep:?} for {n} qubits")));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let spread = |local: usize, qubits: &[usize]| -> usize {
        let k = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|(t, _)| (local >> (k - 1 - t)) & 1 == 1)
            .map(|(_, &q)| 1usize << (n - 1 - q))
            .sum()
    };
    let kept_off: Vec<usize> = (0..1usize << kept.len()).map(|l| spread(l, &kept)).collect();
    let traced_off: Vec<usize> = (0..1usize << traced.len()).map(|l| spread(l, &traced)).collect();
    let out_dim = kept_off.len();
    let mut out = DMatrix::zeros(out_dim, out_dim);
    for &r in &traced_off {
        for (a, &ia) in kept_off.iter().enumerate() {
            for (b, &ib) in kept_off.iter().enumerate() {
                out[(a, b)] += matrix[(ia + r, ib + r)];
            }
        }
    }
    Ok(out)
}

/// A Hermitian, unit-trace, positive semidefinite operator on at most six qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim < 2 || !dim.is_power_of_two() || dim > 1 << MAX_DENSITY_QUBITS {
            return Err(Error::InvalidSize(format!(
                "density matrices need dimension 2^n with 1 ≤ n ≤ {MAX_DENSITY_QUBITS}, got {dim}"
            )));
        }
        let op = HermitianOperator::new(matrix)?;
        let trace = op.trace();
        if (trace - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("trace {trace} is not 1")));
        }
        let min = op.min_eigenvalue();
        if min < -SPECTRAL_TOL {
            return Err(Error::InvalidArgument(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { op })
    }

    pub fn from_statevector(state: &Statevector) -> Result<Self> {
        Self::new(HermitianOperator::projector(state.amplitudes()).into_matrix())
    }

    pub fn num_qubits(&self) -> usize {
        self.op.dim().trailing_zeros() as usize
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.op.matrix()
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        Self::new(partial_trace_matrix(self.op.matrix(), keep)?)
    }

    pub fn purity(&self) -> f64 {
        self.op.trace_product(&self.op)
    }
}
