//! Measure-and-access memories: an initial state, two honest unitaries, and a
//! three-valued key-checking function.
//!
//! Register layout, most significant first: one ancilla qubit, `n` query qubits,
//! then a two-qubit answer register `(flag, value)` where `(0, v)` encodes the
//! bit `v` and `(1, 0)` encodes reject.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::quantum::{Statevector, C64};

pub const MA_ANCILLA_QUBITS: usize = 1;
pub const MA_ANSWER_QUBITS: usize = 2;
/// Largest query register a toy memory may use (unitaries are stored densely).
pub const MA_MAX_QUERY_QUBITS: usize = 8;

/// Output of a measure-and-access key check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaOutput {
    Value(bool),
    Reject,
}

impl MaOutput {
    /// Two-bit answer encoding: `(0, v)` for a value, `(1, 0)` for reject.
    pub fn encode(self) -> usize {
        match self {
            MaOutput::Value(v) => v as usize,
            MaOutput::Reject => 0b10,
        }
    }

    /// The symbol `0`, `1` or `2` (reject).
    pub fn symbol(self) -> u8 {
        match self {
            MaOutput::Value(v) => v as u8,
            MaOutput::Reject => 2,
        }
    }

    pub fn from_symbol(s: u8) -> Result<Self> {
        match s {
            0 => Ok(MaOutput::Value(false)),
            1 => Ok(MaOutput::Value(true)),
            2 => Ok(MaOutput::Reject),
            other => Err(Error::InvalidArgument(format!("{other} is not an oracle output"))),
        }
    }
}

/// A total function `{0,1}^n → {0, 1, reject}`, tabulated by key index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaFunction {
    n: usize,
    table: Vec<MaOutput>,
}

impl MaFunction {
    pub fn new(n: usize, table: Vec<MaOutput>) -> Result<Self> {
        if n == 0 || n > MA_MAX_QUERY_QUBITS || table.len() != 1 << n {
            return Err(Error::InvalidSize(format!(
                "table of {} entries does not cover {{0,1}}^{n} (1 ≤ n ≤ {MA_MAX_QUERY_QUBITS})",
                table.len()
            )));
        }
        Ok(Self { n, table })
    }

    pub fn from_fn(n: usize, f: impl Fn(&BitString) -> MaOutput) -> Result<Self> {
        Self::new(n, (0..1usize << n).map(|i| f(&BitString::from_index(i, n))).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[MaOutput] {
        &self.table
    }

    pub fn eval(&self, y: &BitString) -> Result<MaOutput> {
        if y.len() != self.n {
            return Err(Error::InvalidArgument(format!("query has {} bits, oracle expects {}", y.len(), self.n)));
        }
        Ok(self.table[y.to_index()])
    }

    /// `O_f |y⟩|a⟩ = |y⟩|a ⊕ enc(f(y))⟩` on query ⊗ answer (`n + 2` qubits).
    pub fn oracle_unitary(&self) -> DMatrix<C64> {
        let dim = 1usize << (self.n + MA_ANSWER_QUBITS);
        let mut u = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let y = col >> MA_ANSWER_QUBITS;
            let row = col ^ self.table[y].encode();
            u[(row, col)] = C64::new(1.0, 0.0);
        }
        u
    }
}

/// A measure-and-access memory with an exactly correct honest receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct MaMemorySpec {
    n: usize,
    f: MaFunction,
    key_sets: [Vec<BitString>; 2],
    delta: usize,
    honest_unitaries: [DMatrix<C64>; 2],
}

impl MaMemorySpec {
    /// Assemble and validate a memory. `honest_unitaries` act on ancilla ⊗ query.
    pub fn new(f: MaFunction, key_sets: [Vec<BitString>; 2], honest_unitaries: [DMatrix<C64>; 2]) -> Result<Self> {
        let n = f.n();
        for (i, set) in key_sets.iter().enumerate() {
            let mut expected = None;
            for y in set {
                match f.eval(y)? {
                    MaOutput::Value(v) if expected.is_none_or(|e| e == v) => expected = Some(v),
                    _ => return Err(Error::InvalidArgument(format!("f is not constant on key set {i} at {y}"))),
                }
            }
        }
        if key_sets[0].iter().any(|y| key_sets[1].contains(y)) {
            return Err(Error::InvalidArgument("key sets intersect".into()));
        }
        let valid = f.table().iter().filter(|o| **o != MaOutput::Reject).count();
        if valid != key_sets[0].len() + key_sets[1].len() {
            return Err(Error::InvalidArgument("f accepts keys outside K0 ∪ K1".into()));
        }
        let dim = 1usize << (MA_ANCILLA_QUBITS + n);
        for u in &honest_unitaries {
            if u.nrows() != dim || u.ncols() != dim {
                return Err(Error::InvalidSize(format!("honest unitary must be {dim}×{dim}")));
            }
            let defect = (u.adjoint() * u - DMatrix::<C64>::identity(dim, dim)).camax();
            if defect.is_nan() || defect > 1e-10 {
                return Err(Error::InvalidArgument(format!("honest unitary off by {defect:e}")));
            }
        }
        let delta = key_sets[0].len().max(key_sets[1].len());
        Ok(Self { n, f, key_sets, delta, honest_unitaries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn f(&self) -> &MaFunction {
        &self.f
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn key_set(&self, i: usize) -> &[BitString] {
        &self.key_sets[i]
    }

    pub fn is_key_for(&self, y: &BitString, i: usize) -> bool {
        self.key_sets[i].contains(y)
    }

    /// The secret bit stored under index `i`.
    pub fn secret(&self, i: usize) -> Option<bool> {
        self.key_sets[i].first().and_then(|y| match self.f.eval(y) {
            Ok(MaOutput::Value(v)) => Some(v),
            _ => None,
        })
    }

    /// `U_i` on ancilla ⊗ query.
    pub fn honest_unitary(&self, i: usize) -> &DMatrix<C64> {
        &self.honest_unitaries[i]
    }

    /// Total qubits of ancilla ⊗ query ⊗ answer.
    pub fn register_qubits(&self) -> usize {
        MA_ANCILLA_QUBITS + self.n + MA_ANSWER_QUBITS
    }

    /// Qubit indices of the query register.
    pub fn query_qubits(&self) -> Vec<usize> {
        (MA_ANCILLA_QUBITS..MA_ANCILLA_QUBITS + self.n).collect()
    }

    /// Qubit indices of ancilla ⊗ query.
    pub fn workspace_qubits(&self) -> Vec<usize> {
        (0..MA_ANCILLA_QUBITS + self.n).collect()
    }

    /// Qubit indices of query ⊗ answer, where the oracle acts.
    pub fn oracle_qubits(&self) -> Vec<usize> {
        (MA_ANCILLA_QUBITS..self.register_qubits()).collect()
    }

    pub fn oracle_unitary(&self) -> DMatrix<C64> {
        self.f.oracle_unitary()
    }

    /// Exact probability that the honest receiver for index `i` measures a key
    /// decoding to `s_i`.
    pub fn honest_success_probability(&self, i: usize, initial: &Statevector) -> Result<f64> {
        let secret = self.secret(i);
        let state = initial.apply_operator(self.honest_unitary(i), &self.workspace_qubits())?;
        let probs = state.marginal_probabilities(&self.query_qubits())?;
        Ok(probs
            .iter()
            .enumerate()
            .filter(|(y, _)| Some(self.f.table()[*y]) == secret.map(MaOutput::Value))
            .map(|(_, p)| p)
            .sum())
    }
}

/// Classical access to a measure-and-access oracle: one basis string per call.
#[derive(Debug)]
pub struct ClassicalOracle<'a> {
    f: &'a MaFunction,
    queries: usize,
}

impl<'a> ClassicalOracle<'a> {
    pub fn new(spec: &'a MaMemorySpec) -> Self {
        Self { f: spec.f(), queries: 0 }
    }

    pub fn query(&mut self, y: &BitString) -> Result<MaOutput> {
        let out = self.f.eval(y)?;
        self.queries += 1;
        Ok(out)
    }

    pub fn queries(&self) -> usize {
        self.queries
    }
}

/// Coherent access to a measure-and-access oracle. Only attacks written for the
/// superposition-query model accept this type.
#[derive(Debug)]
pub struct SuperpositionOracle<'a> {
    spec: &'a MaMemorySpec,
    unitary: DMatrix<C64>,
}

impl<'a> SuperpositionOracle<'a> {
    pub fn new(spec: &'a MaMemorySpec) -> Self {
        Self { spec, unitary: spec.oracle_unitary() }
    }

    pub fn spec(&self) -> &MaMemorySpec {
        self.spec
    }

    /// Apply `O_f` to the query ⊗ answer qubits of `state`, whose leading qubits
    /// must follow the memory's register layout.
    pub fn apply(&self, state: &Statevector) -> Result<Statevector> {
        state.apply_operator(&self.unitary, &self.spec.oracle_qubits())
    }
}

/// Build a toy memory on `n` query qubits whose secrets `secrets[i]` each have
/// exactly `delta` keys.
///
/// The initial state `|ψ⟩` on ancilla ⊗ query is random; `U_i` is the Householder
/// reflection sending `|ψ⟩` to `|0⟩_anc ⊗ Σ_{y∈K_i} |y⟩/√Δ` (up to a global phase).
/// The returned statevector is `|ψ⟩ ⊗ |00⟩_answer`.
pub fn make_toy_ma_memory<R: Rng + ?Sized>(
    n: usize,
    delta: usize,
    secrets: [bool; 2],
    rng: &mut R,
) -> Result<(MaMemorySpec, Statevector)> {
    if n == 0 || n > MA_MAX_QUERY_QUBITS {
        return Err(Error::InvalidArgument(format!("query register of {n} qubits outside 1..={MA_MAX_QUERY_QUBITS}")));
    }
    if delta == 0 || 2 * delta > 1 << n {
        return Err(Error::InvalidArgument(format!("cannot fit two disjoint key sets of size {delta} in {{0,1}}^{n}")));
    }
    let picks = sample(rng, 1 << n, 2 * delta).into_vec();
    let key_idx = [picks[..delta].to_vec(), picks[delta..].to_vec()];
    let mut table = vec![MaOutput::Reject; 1 << n];
    for (i, set) in key_idx.iter().enumerate() {
        for &y in set {
            table[y] = MaOutput::Value(secrets[i]);
        }
    }
    let f = MaFunction::new(n, table)?;

    let work_dim = 1usize << (MA_ANCILLA_QUBITS + n);
    let raw: Vec<C64> = (0..work_dim).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let psi = DVector::from_iterator(work_dim, raw.iter().map(|a| a / norm));

    let unitaries = key_idx.clone().map(|set| {
        // Ancilla |0⟩ is the high bit, so query index y sits at amplitude y.
        let mut target = DVector::<C64>::zeros(work_dim);
        for &y in &set {
            target[y] = C64::new(1.0 / (set.len() as f64).sqrt(), 0.0);
        }
        householder(&psi, &target)
    });
    let key_sets = key_idx.map(|set| set.into_iter().map(|y| BitString::from_index(y, n)).collect());
    let spec = MaMemorySpec::new(f, key_sets, unitaries)?;

    let workspace = Statevector::new(psi.iter().copied().collect())?;
    let initial = workspace.tensor(&Statevector::basis(MA_ANSWER_QUBITS, 0)?)?;
    Ok((spec, initial))
}

/// Unitary reflection taking unit vector `from` to `to` times a phase.
fn householder(from: &DVector<C64>, to: &DVector<C64>) -> DMatrix<C64> {
    let dim = from.len();
    let overlap = to.dotc(from);
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    let w = from - to * phase;
    let w_norm_sqr = w.norm_squared();
    let eye = DMatrix::identity(dim, dim);
    if w_norm_sqr < 1e-28 {
        return eye;
    }
    eye - (&w * w.adjoint()) * C64::new(2.0 / w_norm_sqr, 0.0)
}

#[derive(Serialize, Deserialize)]
struct MaMemoryJson {
    n: usize,
    ancilla_qubits: usize,
    /// One symbol per key index: 0, 1, or 2 for reject.
    f: Vec<u8>,
    key_sets: [Vec<BitString>; 2],
    delta: usize,
    /// `[re, im]` entries, row-major.
    honest_unitaries: [Vec<Vec<[f64; 2]>>; 2],
}

impl Serialize for MaMemorySpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = |u: &DMatrix<C64>| {
            (0..u.nrows()).map(|i| (0..u.ncols()).map(|j| [u[(i, j)].re, u[(i, j)].im]).collect()).collect()
        };
        MaMemoryJson {
            n: self.n,
            ancilla_qubits: MA_ANCILLA_QUBITS,
            f: self.f.table().iter().map(|o| o.symbol()).collect(),
            key_sets: self.key_sets.clone(),
            delta: self.delta,
            honest_unitaries: [rows(&self.honest_unitaries[0]), rows(&self.honest_unitaries[1])],
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MaMemorySpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MaMemoryJson::deserialize(deserializer)?;
        if raw.ancilla_qubits != MA_ANCILLA_QUBITS {
            return Err(D::Error::custom("unsupported ancilla size"));
        }
        let table =
            raw.f.iter().map(|&s| MaOutput::from_symbol(s)).collect::<Result<Vec<_>>>().map_err(D::Error::custom)?;
        let f = MaFunction::new(raw.n, table).map_err(D::Error::custom)?;
        let to_matrix = |rows: &Vec<Vec<[f64; 2]>>| {
            let dim = rows.len();
            DMatrix::from_fn(dim, dim, |i, j| rows[i].get(j).map_or(C64::new(f64::NAN, 0.0), |e| C64::new(e[0], e[1])))
        };
        let unitaries = [to_matrix(&raw.honest_unitaries[0]), to_matrix(&raw.honest_unitaries[1])];
        let spec = MaMemorySpec::new(f, raw.key_sets, unitaries).map_err(D::Error::custom)?;
        if spec.delta != raw.delta {
            return Err(D::Error::custom("delta does not match the key sets"));
        }
        Ok(spec)
    }
}
