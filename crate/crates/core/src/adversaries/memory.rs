//! Attacks on measure-and-access memories: rewinding with superposition
//! queries, and the bounded-key attack with classical queries only.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AttackResult;
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::protocol::Verdict;
use crate::quantum::{Statevector, C64};
use crate::rng::{SeedStream, TrialRng};
use crate::token::{make_toy_ma_memory, ClassicalOracle, MaMemorySpec, MaOutput, SuperpositionOracle};

/// Exact result of the rewinding attack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewindOutcome {
    /// Most likely value of the copied first answer and of the second answer.
    pub bits: [bool; 2],
    /// `P(external = bits[0])` and `P(answer = bits[1])`.
    pub marginals: [f64; 2],
    /// Probability that both registers read `bits` and the second answer is
    /// not a reject.
    pub joint_probability: f64,
    /// Fidelity of the rewound memory registers with `initial ⊗ |bits[0]⟩`.
    pub rewind_fidelity: f64,
}

/// Run `A₀`, copy the answer bit to a fresh external qubit with a CNOT, undo
/// `A₀`, then run `A₁`. `initial` is laid out as ancilla ⊗ query ⊗ answer.
/// Everything is computed on the exact statevector.
pub fn rewinding_attack(oracle: &SuperpositionOracle, initial: &Statevector) -> Result<RewindOutcome> {
    let spec = oracle.spec();
    if initial.num_qubits() != spec.register_qubits() {
        return Err(Error::InvalidArgument(format!(
            "initial state has {} qubits, memory needs {}",
            initial.num_qubits(),
            spec.register_qubits()
        )));
    }
    let work = spec.workspace_qubits();
    let flag = spec.register_qubits() - 2;
    let value = flag + 1;
    let external = value + 1;
    let u0 = spec.honest_unitary(0);
    let u1 = spec.honest_unitary(1);

    let start = initial.tensor(&Statevector::basis(1, 0)?)?;
    let after_first = oracle.apply(&start.apply_operator(u0, &work)?)?;
    let copied = after_first.apply_operator(&cnot(), &[value, external])?;
    let rewound = oracle.apply(&copied)?.apply_operator(&u0.adjoint(), &work)?;
    let after_second = oracle.apply(&rewound.apply_operator(u1, &work)?)?;

    let ext = after_second.marginal_probabilities(&[external])?;
    let val = after_second.marginal_probabilities(&[value])?;
    let bits = [ext[1] > ext[0], val[1] > val[0]];
    let joint = after_second.marginal_probabilities(&[external, flag, value])?;
    let joint_probability = joint[(bits[0] as usize) << 2 | bits[1] as usize];
    let reference = initial.tensor(&Statevector::basis(1, bits[0] as usize)?)?;
    Ok(RewindOutcome {
        bits,
        marginals: [ext[bits[0] as usize], val[bits[1] as usize]],
        joint_probability,
        rewind_fidelity: rewound.fidelity(&reference),
    })
}

fn cnot() -> DMatrix<C64> {
    let one = C64::new(1.0, 0.0);
    let mut m = DMatrix::zeros(4, 4);
    for (row, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(row, col)] = one;
    }
    m
}

fn secret_of(out: MaOutput) -> Option<bool> {
    match out {
        MaOutput::Value(v) => Some(v),
        MaOutput::Reject => None,
    }
}

/// The bounded-key attack with classical oracle access: run `U₀`, measure the
/// query register and query it, then run `U₀†` and `U₁` on the collapsed state,
/// measure and query again.
pub fn bounded_key_attack<R: Rng + ?Sized>(
    spec: &MaMemorySpec,
    initial: &Statevector,
    oracle: &mut ClassicalOracle,
    rng: &mut R,
) -> Result<AttackResult> {
    let work = spec.workspace_qubits();
    let query = spec.query_qubits();
    let first = initial.apply_operator(spec.honest_unitary(0), &work)?;
    let (y0, collapsed) = first.measure_qubits(&query, rng)?;
    let second = collapsed
        .apply_operator(&spec.honest_unitary(0).adjoint(), &work)?
        .apply_operator(spec.honest_unitary(1), &work)?;
    let (y1, _) = second.measure_qubits(&query, rng)?;
    let outputs = [oracle.query(&y0)?, oracle.query(&y1)?];
    Ok(AttackResult {
        extracted: outputs.map(secret_of),
        queries_made: 2,
        both_accepted: outputs.iter().all(|o| *o != MaOutput::Reject),
    })
}

/// Outcome distributions of the bounded-key attack, so that trials only sample.
/// `second[y0]` is the distribution of the second measurement given that the
/// first returned `y0`.
#[derive(Debug, Clone)]
pub struct BoundedKeySampler {
    n: usize,
    first: Vec<f64>,
    second: BTreeMap<usize, Vec<f64>>,
    table: Vec<MaOutput>,
}

/// First-measurement outcomes below this probability are dropped; they are
/// rounding residue of outcomes that are impossible in exact arithmetic.
const NEGLIGIBLE: f64 = 1e-14;

impl BoundedKeySampler {
    pub fn new(spec: &MaMemorySpec, initial: &Statevector) -> Result<Self> {
        let work = spec.workspace_qubits();
        let query = spec.query_qubits();
        let back_and_forth = spec.honest_unitary(1) * spec.honest_unitary(0).adjoint();
        let after_u0 = initial.apply_operator(spec.honest_unitary(0), &work)?;
        let mut first = after_u0.marginal_probabilities(&query)?;
        let mut second = BTreeMap::new();
        for (y0, p) in first.iter_mut().enumerate() {
            if *p < NEGLIGIBLE {
                *p = 0.0;
                continue;
            }
            let (_, collapsed) = after_u0.project(&query, y0)?;
            let state = collapsed.apply_operator(&back_and_forth, &work)?;
            second.insert(y0, state.marginal_probabilities(&query)?);
        }
        let total: f64 = first.iter().sum();
        first.iter_mut().for_each(|p| *p /= total);
        Ok(Self { n: spec.n(), first, second, table: spec.f().table().to_vec() })
    }

    /// Exact probability that both answers are the memory's secrets.
    pub fn success_probability(&self, secrets: [bool; 2]) -> f64 {
        self.second
            .iter()
            .filter(|(&y0, _)| self.table[y0] == MaOutput::Value(secrets[0]))
            .map(|(&y0, dist)| {
                let hit: f64 = dist
                    .iter()
                    .zip(&self.table)
                    .filter(|(_, &o)| o == MaOutput::Value(secrets[1]))
                    .map(|(p, _)| p)
                    .sum();
                self.first[y0] * hit
            })
            .sum()
    }

    /// One run of the attack: the two measured strings.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (BitString, BitString) {
        let y0 = sample(&self.first, rng);
        let y1 = sample(&self.second[&y0], rng);
        (BitString::from_index(y0, self.n), BitString::from_index(y1, self.n))
    }
}

fn sample<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let mut u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    for (i, &p) in probs.iter().enumerate() {
        if u < p {
            return i;
        }
        u -= p;
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Exact probability that the bounded-key attack returns both secrets.
pub fn bounded_key_success_probability(spec: &MaMemorySpec, initial: &Statevector) -> Result<f64> {
    let secrets = [0, 1].map(|i| spec.secret(i));
    let [Some(s0), Some(s1)] = secrets else {
        return Err(Error::InvalidArgument("memory has an empty key set".into()));
    };
    Ok(BoundedKeySampler::new(spec, initial)?.success_probability([s0, s1]))
}

/// Parameters for experiments on toy measure-and-access memories. `None`
/// secrets are drawn uniformly per memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryAttackConfig {
    pub n: usize,
    pub delta: usize,
    pub trials: u64,
    pub seed: u64,
    pub s0: Option<bool>,
    pub s1: Option<bool>,
}

impl MemoryAttackConfig {
    fn memory(&self, rng: &mut TrialRng) -> Result<(MaMemorySpec, Statevector, [bool; 2])> {
        let secrets = [self.s0.unwrap_or_else(|| rng.random()), self.s1.unwrap_or_else(|| rng.random())];
        let (spec, initial) = make_toy_ma_memory(self.n, self.delta, secrets, rng)?;
        Ok((spec, initial, secrets))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedKeyReport {
    pub seed: u64,
    pub n: usize,
    pub delta: usize,
    pub trials: u64,
    pub attack: String,
    #[serde(with = "crate::bits::bit_serde")]
    pub s0: bool,
    #[serde(with = "crate::bits::bit_serde")]
    pub s1: bool,
    pub success_frequency: f64,
    pub exact_success_probability: f64,
    /// `1/Δ²`.
    pub lower_bound: f64,
    pub sigma: f64,
    pub verdict: Verdict,
}

/// Build one toy memory from the seed and run the bounded-key attack on it
/// `trials` times. Passes iff the success frequency is at least `1/Δ²`.
pub fn run_bounded_key_trials(config: &MemoryAttackConfig) -> Result<BoundedKeyReport> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let streams = SeedStream::new(config.seed);
    let (spec, initial, secrets) = config.memory(&mut streams.fork(0).stream(0))?;
    let sampler = BoundedKeySampler::new(&spec, &initial)?;
    let trial_streams = streams.fork(1);
    let hits: u64 = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let (y0, y1) = sampler.sample(&mut trial_streams.stream(t));
            let mut oracle = ClassicalOracle::new(&spec);
            let outputs = [oracle.query(&y0), oracle.query(&y1)];
            matches!(outputs, [Ok(a), Ok(b)] if a == MaOutput::Value(secrets[0]) && b == MaOutput::Value(secrets[1]))
                as u64
        })
        .sum();
    let freq = hits as f64 / config.trials as f64;
    let lower_bound = 1.0 / (config.delta * config.delta) as f64;
    Ok(BoundedKeyReport {
        seed: config.seed,
        n: config.n,
        delta: config.delta,
        trials: config.trials,
        attack: "bounded-key".into(),
        s0: secrets[0],
        s1: secrets[1],
        success_frequency: freq,
        exact_success_probability: sampler.success_probability(secrets),
        lower_bound,
        sigma: (freq * (1.0 - freq) / config.trials as f64).sqrt(),
        verdict: Verdict::from_pass(freq >= lower_bound),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewindReport {
    pub seed: u64,
    pub n: usize,
    pub delta: usize,
    /// Number of independently generated memories attacked.
    pub trials: u64,
    pub attack: String,
    /// Memories whose two secrets were both recovered.
    pub recovered: u64,
    pub min_joint_probability: f64,
    pub min_rewind_fidelity: f64,
    pub verdict: Verdict,
}

/// Attack `trials` independently generated toy memories with the rewinding
/// attack. Passes iff every memory gives up both secrets with probability 1
/// (within `1e-10`).
pub fn run_rewinding_trials(config: &MemoryAttackConfig) -> Result<RewindReport> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let streams = SeedStream::new(config.seed);
    let outcomes: Vec<(bool, RewindOutcome)> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let (spec, initial, secrets) = config.memory(&mut streams.stream(t))?;
            let outcome = rewinding_attack(&SuperpositionOracle::new(&spec), &initial)?;
            Ok((outcome.bits == secrets, outcome))
        })
        .collect::<Result<_>>()?;
    let recovered = outcomes.iter().filter(|(ok, _)| *ok).count() as u64;
    let min_joint = outcomes.iter().map(|(_, o)| o.joint_probability).fold(f64::INFINITY, f64::min);
    let min_fidelity = outcomes.iter().map(|(_, o)| o.rewind_fidelity).fold(f64::INFINITY, f64::min);
    Ok(RewindReport {
        seed: config.seed,
        n: config.n,
        delta: config.delta,
        trials: config.trials,
        attack: "rewind".into(),
        recovered,
        min_joint_probability: min_joint,
        min_rewind_fidelity: min_fidelity,
        verdict: Verdict::from_pass(recovered == config.trials && min_joint >= 1.0 - 1e-10),
    })
}
