use nalgebra::DMatrix;
use rand::Rng;

use super::{C64, MAX_STATEVECTOR_QUBITS, NORM_TOL};
use crate::bits::{BB84Key, Basis, BitString};
use crate::error::{Error, Result};

/// 2×2 complex matrix acting on one qubit, row-major.
pub type Gate1 = [[C64; 2]; 2];

/// A normalized pure state on `num_qubits` qubits.
///
/// Qubit 0 is the most significant bit of the amplitude index, so the
/// amplitude of `|q0 q1 … q(n-1)⟩` lives at index `q0·2^(n-1) + … + q(n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// Wrap an amplitude vector. The length must be `2^n` with `1 ≤ n ≤ 20` and the
    /// squared norm must be 1 within `1e-12`.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidSize(format!("{len} amplitudes is not 2^n for n ≥ 1")));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_qubit_count(num_qubits)?;
        let state = Self { num_qubits, amps };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("squared norm {norm} is not 1")));
        }
        Ok(state)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    /// Tensor product of single-qubit states, qubit 0 first.
    pub fn product(qubits: &[[C64; 2]]) -> Result<Self> {
        check_qubit_count(qubits.len())?;
        let mut amps = vec![C64::new(1.0, 0.0)];
        for q in qubits {
            amps = amps.iter().flat_map(|&a| [a * q[0], a * q[1]]).collect();
        }
        Self::new(amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Statevector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `self ⊗ other`; `self` occupies the leading qubits.
    pub fn tensor(&self, other: &Statevector) -> Result<Statevector> {
        check_qubit_count(self.num_qubits + other.num_qubits)?;
        let amps = self.amps.iter().flat_map(|&a| other.amps.iter().map(move |&b| a * b)).collect();
        Ok(Self { num_qubits: self.num_qubits + other.num_qubits, amps })
    }

    /// Apply a single-qubit gate to qubit `qubit`.
    pub fn apply_single_qubit(&self, qubit: usize, gate: &Gate1) -> Result<Statevector> {
        self.check_qubit(qubit)?;
        let mut out = self.clone();
        out.apply_single_in_place(qubit, gate);
        Ok(out)
    }

    fn apply_single_in_place(&mut self, qubit: usize, gate: &Gate1) {
        let stride = 1usize << (self.num_qubits - 1 - qubit);
        for base in (0..self.amps.len()).filter(|i| i & stride == 0) {
            let a0 = self.amps[base];
            let a1 = self.amps[base | stride];
            self.amps[base] = gate[0][0] * a0 + gate[0][1] * a1;
            self.amps[base | stride] = gate[1][0] * a0 + gate[1][1] * a1;
        }
    }

    /// `H^{⊗n}`.
    pub fn apply_hadamard_all(&self) -> Statevector {
        let h = hadamard();
        let mut out = self.clone();
        for q in 0..self.num_qubits {
            out.apply_single_in_place(q, &h);
        }
        out
    }

    /// Apply a `2^k × 2^k` operator to the listed qubits. `targets[0]` is the most
    /// significant qubit of the operator's local index.
    pub fn apply_operator(&self, op: &DMatrix<C64>, targets: &[usize]) -> Result<Statevector> {
        let k = targets.len();
        if k == 0 || op.nrows() != 1 << k || op.ncols() != 1 << k {
            return Err(Error::InvalidArgument(format!(
                "{}×{} operator does not act on {k} qubits",
                op.nrows(),
                op.ncols()
            )));
        }
        self.check_distinct(targets)?;
        let n = self.num_qubits;
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|local| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(t, _)| (local >> (k - 1 - t)) & 1 == 1)
                    .map(|(_, &q)| 1usize << (n - 1 - q))
                    .sum()
            })
            .collect();
        let mask: usize = offsets[offsets.len() - 1];
        let mut out = self.amps.clone();
        let mut local = vec![C64::new(0.0, 0.0); 1 << k];
        for base in (0..self.amps.len()).filter(|i| i & mask == 0) {
            for (slot, &off) in local.iter_mut().zip(&offsets) {
                *slot = self.amps[base + off];
            }
            for (row, &off) in offsets.iter().enumerate() {
                out[base + off] = (0..local.len()).map(|col| op[(row, col)] * local[col]).sum();
            }
        }
        Ok(Self { num_qubits: n, amps: out })
    }

    /// Sample a full computational-basis measurement. Returns the outcome and the
    /// collapsed basis state.
    pub fn measure_computational<R: Rng + ?Sized>(&self, rng: &mut R) -> (BitString, Statevector) {
        let index = sample_index(self.amps.iter().map(|a| a.norm_sqr()), rng);
        let outcome = BitString::from_index(index, self.num_qubits);
        let post = Self::basis(self.num_qubits, index).expect("index within range");
        (outcome, post)
    }

    /// Measure every qubit `i` in the basis
    /// `{cos(a)|0⟩ + sin(a)|1⟩, −sin(a)|0⟩ + cos(a)|1⟩}` with `a = angles[i]`.
    /// Outcome bit 0 corresponds to the first vector.
    pub fn measure_in_rotated_basis<R: Rng + ?Sized>(
        &self,
        angles: &[f64],
        rng: &mut R,
    ) -> Result<(BitString, Statevector)> {
        if angles.len() != self.num_qubits {
            return Err(Error::InvalidArgument(format!("{} angles for {} qubits", angles.len(), self.num_qubits)));
        }
        let mut rotated = self.clone();
        for (q, &a) in angles.iter().enumerate() {
            rotated.apply_single_in_place(q, &rotation_to_computational(a));
        }
        let (outcome, _) = rotated.measure_computational(rng);
        let post: Vec<[C64; 2]> =
            angles.iter().zip(outcome.iter()).map(|(&a, bit)| rotated_basis_vector(a, bit)).collect();
        Ok((outcome, Self::product(&post)?))
    }

    /// Probability distribution of the computational-basis outcomes on `qubits`
    /// (listed order, first qubit most significant).
    pub fn marginal_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.check_distinct(qubits)?;
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            probs[self.extract(i, qubits)] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Measure only `qubits` in the computational basis; the rest of the register
    /// collapses accordingly.
    pub fn measure_qubits<R: Rng + ?Sized>(&self, qubits: &[usize], rng: &mut R) -> Result<(BitString, Statevector)> {
        let probs = self.marginal_probabilities(qubits)?;
        let outcome = sample_index(probs.iter().copied(), rng);
        let (_, post) = self.project(qubits, outcome)?;
        Ok((BitString::from_index(outcome, qubits.len()), post))
    }

    /// Project `qubits` onto the computational outcome `outcome` (first listed
    /// qubit most significant). Returns the outcome probability and the
    /// renormalized post-measurement state.
    pub fn project(&self, qubits: &[usize], outcome: usize) -> Result<(f64, Statevector)> {
        self.check_distinct(qubits)?;
        if outcome >= 1 << qubits.len() {
            return Err(Error::InvalidArgument(format!("outcome {outcome} out of range for {} qubits", qubits.len())));
        }
        let mut amps: Vec<C64> = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| if self.extract(i, qubits) == outcome { a } else { C64::new(0.0, 0.0) })
            .collect();
        let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if p <= 0.0 {
            return Err(Error::InvalidArgument(format!("outcome {outcome} has probability zero")));
        }
        let scale = 1.0 / p.sqrt();
        amps.iter_mut().for_each(|a| *a *= scale);
        Ok((p, Self { num_qubits: self.num_qubits, amps }))
    }

    fn extract(&self, index: usize, qubits: &[usize]) -> usize {
        qubits.iter().fold(0, |acc, &q| (acc << 1) | ((index >> (self.num_qubits - 1 - q)) & 1))
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::InvalidArgument(format!("qubit {qubit} out of range for {} qubits", self.num_qubits)));
        }
        Ok(())
    }

    fn check_distinct(&self, qubits: &[usize]) -> Result<()> {
        for (i, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..i].contains(&q) {
                return Err(Error::InvalidArgument(format!("qubit {q} listed twice")));
            }
        }
        Ok(())
    }
}

/// `|x⟩_θ = ⊗ᵢ |xᵢ⟩_θᵢ`.
pub fn prepare_bb84(key: &BB84Key) -> Result<Statevector> {
    if key.is_empty() {
        return Err(Error::InvalidSize("a key needs at least one qubit".into()));
    }
    check_qubit_count(key.len())?;
    let qubits: Vec<[C64; 2]> = key.x().iter().zip(key.theta().iter()).map(|(x, t)| bb84_qubit(x, t)).collect();
    Statevector::product(&qubits)
}

/// Single-qubit conjugate coding state.
pub fn bb84_qubit(bit: bool, basis: Basis) -> [C64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match (basis, bit) {
        (Basis::Rectilinear, false) => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        (Basis::Rectilinear, true) => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        (Basis::Diagonal, false) => [C64::new(s, 0.0), C64::new(s, 0.0)],
        (Basis::Diagonal, true) => [C64::new(s, 0.0), C64::new(-s, 0.0)],
    }
}

pub fn hadamard() -> Gate1 {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[s, s], [s, -s]]
}

/// Vector `bit` of the basis at `angle`.
pub fn rotated_basis_vector(angle: f64, bit: bool) -> [C64; 2] {
    let (s, c) = angle.sin_cos();
    if bit {
        [C64::new(-s, 0.0), C64::new(c, 0.0)]
    } else {
        [C64::new(c, 0.0), C64::new(s, 0.0)]
    }
}

/// Maps the basis at `angle` onto the computational basis.
pub(crate) fn rotation_to_computational(angle: f64) -> Gate1 {
    let (s, c) = angle.sin_cos();
    [[C64::new(c, 0.0), C64::new(s, 0.0)], [C64::new(-s, 0.0), C64::new(c, 0.0)]]
}

pub(crate) fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::InvalidSize(format!("{n} qubits outside 1..={MAX_STATEVECTOR_QUBITS}")));
    }
    Ok(())
}

/// Inverse-CDF sampling from a (possibly slightly unnormalized) distribution.
pub(crate) fn sample_index<I, R>(weights: I, rng: &mut R) -> usize
where
    I: Iterator<Item = f64> + Clone,
    R: Rng + ?Sized,
{
    let total: f64 = weights.clone().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last_nonzero = i;
            acc += w;
            if target < acc {
                return i;
            }
        }
    }
    last_nonzero
}
