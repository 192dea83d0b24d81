//! Witnesses for the single-qubit extraction SDP.
//!
//! Reduced register order for every 8×8 operator here: Z-basis key bit,
//! X-basis key bit, input qubit. The constant choice-bit prefix registers of the
//! five-register formulation factor out as `|0⟩⟨0| ⊗ |1⟩⟨1|`; see
//! [`embedded_objective`] and [`embedded_primal`] for the full layout.

use std::f64::consts::FRAC_PI_8;

use nalgebra::DMatrix;
use serde::Serialize;

use super::formulas::alpha;
use super::tensor::{tensor_check_blocks, TensorCheck};
use crate::error::{Error, Result};
use crate::quantum::{hadamard, HermitianOperator, C64};

/// PSD and equality tolerance for witness checks.
pub const WITNESS_TOL: f64 = 1e-10;

fn ket(bit: bool) -> [C64; 2] {
    if bit {
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
    } else {
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    }
}

/// `V_{b,c} = |b⟩⟨b| + H|c⟩⟨c|H`.
pub fn v_bc(b: bool, c: bool) -> HermitianOperator {
    let h = hadamard();
    let hc = {
        let k = ket(c);
        [h[0][0] * k[0] + h[0][1] * k[1], h[1][0] * k[0] + h[1][1] * k[1]]
    };
    HermitianOperator::projector(&ket(b)).add(&HermitianOperator::projector(&hc)).expect("both 2×2")
}

/// Block-diagonal objective `A′ = (1/4) Σ_{b,c} |b⟩⟨b| ⊗ |c⟩⟨c| ⊗ V_{b,c}`.
pub fn objective_a_prime() -> HermitianOperator {
    let mut acc = HermitianOperator::zeros(8);
    for b in [false, true] {
        for c in [false, true] {
            let term = HermitianOperator::projector(&ket(b))
                .kron(&HermitianOperator::projector(&ket(c)))
                .kron(&v_bc(b, c))
                .scale(0.25);
            acc = acc.add(&term).expect("8×8");
        }
    }
    acc
}

/// Breidbart basis vectors: `|ψ₊⟩ = cos(π/8)|0⟩ + sin(π/8)|1⟩` and its complement.
pub fn breidbart_vectors() -> [[C64; 2]; 2] {
    let (s, c) = FRAC_PI_8.sin_cos();
    [[C64::new(c, 0.0), C64::new(s, 0.0)], [C64::new(-s, 0.0), C64::new(c, 0.0)]]
}

/// `X′ = |00⟩⟨00| ⊗ |ψ₊⟩⟨ψ₊| + |11⟩⟨11| ⊗ |ψ₋⟩⟨ψ₋|`, where `|ψ±⟩` are the
/// eigenvectors of `V_{0,0}` for `1 ± 1/√2`.
pub fn primal_witness() -> HermitianOperator {
    let eig = v_bc(false, false).eigen();
    let psi_plus: Vec<C64> = eig.vectors[1].iter().copied().collect();
    let psi_minus: Vec<C64> = eig.vectors[0].iter().copied().collect();
    let zero_zero =
        HermitianOperator::projector(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    let one_one =
        HermitianOperator::projector(&[C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    zero_zero
        .kron(&HermitianOperator::projector(&psi_plus))
        .add(&one_one.kron(&HermitianOperator::projector(&psi_minus)))
        .expect("8×8")
}

/// `Y = (1/4 + 1/(4√2)) I₂`.
pub fn dual_witness() -> HermitianOperator {
    HermitianOperator::identity(2).scale(alpha() / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// Satisfied when `slack` (a minimum eigenvalue) is at least `-tol`.
    Psd,
    /// Satisfied when `residual` is at most `tol`.
    Equality,
}

/// One checked constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub kind: ConstraintKind,
    /// Minimum eigenvalue for PSD constraints, `-residual` for equalities.
    pub slack: f64,
    pub satisfied: bool,
}

impl ConstraintCheck {
    fn psd(name: impl Into<String>, op: &HermitianOperator) -> Self {
        let slack = op.min_eigenvalue();
        Self { name: name.into(), kind: ConstraintKind::Psd, slack, satisfied: slack >= -WITNESS_TOL }
    }

    fn equality(name: impl Into<String>, residual: f64) -> Self {
        Self { name: name.into(), kind: ConstraintKind::Equality, slack: -residual, satisfied: residual <= WITNESS_TOL }
    }
}

/// Full feasibility report for a witness pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdpCertificate {
    pub constraints: Vec<ConstraintCheck>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub duality_gap: f64,
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    /// n-fold tensor-power checks.
    pub tensor_powers: Vec<TensorCheck>,
}

impl SdpCertificate {
    pub fn all_satisfied(&self) -> bool {
        self.constraints.iter().all(|c| c.satisfied) && self.tensor_powers.iter().all(|t| t.satisfied)
    }

    pub fn first_violation(&self) -> Option<&ConstraintCheck> {
        self.constraints.iter().find(|c| !c.satisfied)
    }
}

/// The verified witnesses with their common value.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpWitnessPair {
    pub objective_a_prime: HermitianOperator,
    pub primal_x_prime: HermitianOperator,
    pub dual_y: HermitianOperator,
    pub value: f64,
}

/// Evaluate every constraint without failing. `tensor_max_n` extends the
/// check to `(X′)^{⊗n}` and `Y^{⊗n}` for `n = 1..=tensor_max_n`.
pub fn certify(
    a_prime: &HermitianOperator,
    x_prime: &HermitianOperator,
    y: &HermitianOperator,
    tensor_max_n: u32,
) -> Result<SdpCertificate> {
    if a_prime.dim() != 8 || x_prime.dim() != 8 || y.dim() != 2 {
        return Err(Error::InvalidSize("expected 8×8 A′ and X′ and a 2×2 Y".into()));
    }
    let mut constraints = vec![ConstraintCheck::psd("primal: X' ⪰ 0", x_prime)];
    let reduced = x_prime.partial_trace(&[2])?;
    constraints.push(ConstraintCheck::equality(
        "primal: Tr_QQ(X') = I",
        reduced.max_abs_diff(&HermitianOperator::identity(2)),
    ));
    let primal_constraints = constraints.len();

    for b in [false, true] {
        for c in [false, true] {
            let slack_op = y.sub(&v_bc(b, c).scale(0.25))?;
            constraints.push(ConstraintCheck::psd(format!("dual: Y ⪰ (1/4)V_{{{},{}}}", b as u8, c as u8), &slack_op));
        }
    }
    let lifted = HermitianOperator::identity(4).kron(y).sub(a_prime)?;
    constraints.push(ConstraintCheck::psd("dual: I ⊗ Y ⪰ A'", &lifted));

    let primal_value = x_prime.trace_product(a_prime);
    let dual_value = y.trace();
    let duality_gap = (primal_value - dual_value).abs();
    let primal_feasible = constraints[..primal_constraints].iter().all(|c| c.satisfied);
    let dual_feasible = constraints[primal_constraints..].iter().all(|c| c.satisfied);
    constraints.push(ConstraintCheck::equality("zero duality gap", duality_gap));

    let tensor_powers =
        (1..=tensor_max_n).map(|n| tensor_check_blocks(a_prime, x_prime, y, n)).collect::<Result<Vec<_>>>()?;

    Ok(SdpCertificate {
        constraints,
        primal_value,
        dual_value,
        duality_gap,
        primal_feasible,
        dual_feasible,
        tensor_powers,
    })
}

/// Check a witness pair, failing on the first violated constraint.
pub fn verify_witnesses(
    a_prime: &HermitianOperator,
    x_prime: &HermitianOperator,
    y: &HermitianOperator,
) -> Result<SdpWitnessPair> {
    let cert = certify(a_prime, x_prime, y, 0)?;
    if let Some(bad) = cert.first_violation() {
        return Err(Error::Verification {
            constraint: bad.name.clone(),
            detail: match bad.kind {
                ConstraintKind::Psd => format!("minimum eigenvalue {:e}", bad.slack),
                ConstraintKind::Equality => format!("residual {:e}", -bad.slack),
            },
        });
    }
    Ok(SdpWitnessPair {
        objective_a_prime: a_prime.clone(),
        primal_x_prime: x_prime.clone(),
        dual_y: y.clone(),
        value: cert.primal_value,
    })
}

/// Build and verify the shipped witnesses.
pub fn verify_witness_pair() -> Result<SdpWitnessPair> {
    verify_witnesses(&objective_a_prime(), &primal_witness(), &dual_witness())
}

/// Reorder qubits: output qubit `k` is input qubit `order[k]`.
fn permute_qubits(op: &HermitianOperator, order: &[usize]) -> HermitianOperator {
    let n = order.len();
    let dim = 1usize << n;
    let source = |out_idx: usize| -> usize {
        order.iter().enumerate().map(|(k, &src)| ((out_idx >> (n - 1 - k)) & 1) << (n - 1 - src)).sum()
    };
    let m = op.matrix();
    HermitianOperator::new(DMatrix::from_fn(dim, dim, |i, j| m[(source(i), source(j))]))
        .expect("permutation preserves Hermiticity")
}

/// Registers 1..5 in order: Z-query prefix, Z-key bit, X-query prefix, X-key bit,
/// input. Built from `reg1 ⊗ reg3 ⊗ A′` and reordered.
fn embed_with_prefixes(op: &HermitianOperator) -> HermitianOperator {
    let prefixes = HermitianOperator::projector(&ket(false)).kron(&HermitianOperator::projector(&ket(true)));
    // Kronecker layout is (reg1, reg3, reg2, reg4, reg5); move to (reg1..reg5).
    permute_qubits(&prefixes.kron(op), &[0, 2, 1, 3, 4])
}

/// `A = |0⟩⟨0|₁ ⊗ |1⟩⟨1|₃ ⊗ A′` on the five-register space (dimension 32).
pub fn embedded_objective() -> HermitianOperator {
    embed_with_prefixes(&objective_a_prime())
}

/// `X = |0⟩⟨0|₁ ⊗ |1⟩⟨1|₃ ⊗ X′` on the five-register space.
pub fn embedded_primal() -> HermitianOperator {
    embed_with_prefixes(&primal_witness())
}
