//! The honest one-time-memory protocol, the ideal functionality, the simulator,
//! and the real-vs-ideal distinguishing experiment.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversaries::AttackStrategy;
use crate::bits::{BB84Key, BitString};
use crate::bounds::interactive_bound;
use crate::error::{Error, Result};
use crate::quantum::{QuantumKey, MAX_STATEVECTOR_QUBITS};
use crate::rng::{SeedStream, TrialRng};
use crate::token::{TokenAccess, TokenOutput, TokenProgram, WrapInstance, DEFAULT_QUERY_BUDGET};

/// Pass/fail outcome of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// The ideal one-time memory: answers exactly one choice bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealOtm {
    s0: bool,
    s1: bool,
    consumed: bool,
}

impl IdealOtm {
    pub fn new(s0: bool, s1: bool) -> Self {
        Self { s0, s1, consumed: false }
    }

    pub fn is_consumed(&self) -> bool {
        self.consumed
    }

    pub fn execute(&mut self, b: bool) -> Result<bool> {
        if self.consumed {
            return Err(Error::AlreadyConsumed);
        }
        self.consumed = true;
        Ok(if b { self.s1 } else { self.s0 })
    }
}

pub fn ideal_execute(otm: &mut IdealOtm, b: bool) -> Result<bool> {
    otm.execute(b)
}

/// Everything the honest sender produces. `secret_key` stays with the harness.
#[derive(Debug, Clone)]
pub struct SenderOutput {
    pub quantum_key: QuantumKey,
    pub wrap: WrapInstance,
    pub secret_key: BB84Key,
}

pub fn sender_create<R: Rng + ?Sized>(s0: bool, s1: bool, n: usize, rng: &mut R) -> Result<SenderOutput> {
    sender_create_with_budget(s0, s1, n, DEFAULT_QUERY_BUDGET, rng)
}

pub fn sender_create_with_budget<R: Rng + ?Sized>(
    s0: bool,
    s1: bool,
    n: usize,
    query_budget: usize,
    rng: &mut R,
) -> Result<SenderOutput> {
    if n == 0 || n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::InvalidSize(format!("key length {n} outside 1..={MAX_STATEVECTOR_QUBITS}")));
    }
    let secret_key = BB84Key::random(n, rng);
    let quantum_key = QuantumKey::prepare(&secret_key)?;
    let wrap = WrapInstance::new(TokenProgram::new(s0, s1, secret_key.clone()), query_budget);
    Ok(SenderOutput { quantum_key, wrap, secret_key })
}

/// The honest receiver: measure in the basis selected by `b`, then query the
/// token once.
pub fn honest_receiver_execute<R: Rng + ?Sized>(b: bool, out: &mut SenderOutput, rng: &mut R) -> Result<bool> {
    match honest_query(&out.quantum_key, b, &mut out.wrap, rng)? {
        TokenOutput::Accept(s) => Ok(s),
        TokenOutput::Reject => Err(Error::HonestRejected),
    }
}

pub(crate) fn honest_query<R: Rng + ?Sized>(
    key: &QuantumKey,
    b: bool,
    token: &mut dyn TokenAccess,
    rng: &mut R,
) -> Result<TokenOutput> {
    let state = if b { key.apply_hadamard_all() } else { key.clone() };
    let (y, _) = state.measure_computational(rng);
    token.query(&y, b)
}

/// The ideal-world simulator. It answers token queries with a dummy program
/// holding the same `(x, θ)` and zero secrets, and forwards the first accepting
/// query to the ideal memory.
#[derive(Debug, Clone)]
pub struct SimulatorState {
    dummy: WrapInstance,
    first_accept: Option<(bool, bool)>,
    ideal: IdealOtm,
    ideal_calls: usize,
    case2: bool,
    fallback: bool,
}

impl SimulatorState {
    /// Case-2 answers return this bit.
    pub const FALLBACK_BIT: bool = false;

    pub fn new(key: BB84Key, ideal: IdealOtm, query_budget: usize) -> Self {
        Self {
            dummy: WrapInstance::new(TokenProgram::new(false, false, key), query_budget),
            first_accept: None,
            ideal,
            ideal_calls: 0,
            case2: false,
            fallback: Self::FALLBACK_BIT,
        }
    }

    pub fn dummy_program(&self) -> &TokenProgram {
        self.dummy.program()
    }

    pub fn first_accept(&self) -> Option<(bool, bool)> {
        self.first_accept
    }

    /// Accepting inputs were produced for both choice bits.
    pub fn case2(&self) -> bool {
        self.case2
    }

    pub fn ideal_calls(&self) -> usize {
        self.ideal_calls
    }

    pub fn answer(&mut self, y: &BitString, b: bool) -> Result<TokenOutput> {
        if !self.dummy.run(y, b)?.is_accept() {
            return Ok(TokenOutput::Reject);
        }
        match self.first_accept {
            None => {
                let s = self.ideal.execute(b)?;
                self.ideal_calls += 1;
                self.first_accept = Some((b, s));
                Ok(TokenOutput::Accept(s))
            }
            Some((cached_b, s)) if cached_b == b => Ok(TokenOutput::Accept(s)),
            Some(_) => {
                self.case2 = true;
                Ok(TokenOutput::Accept(self.fallback))
            }
        }
    }
}

impl TokenAccess for SimulatorState {
    fn query(&mut self, y: &BitString, b: bool) -> Result<TokenOutput> {
        self.answer(y, b)
    }

    fn remaining(&self) -> usize {
        self.dummy.remaining()
    }
}

pub fn simulator_answer(sim: &mut SimulatorState, y: &BitString, b: bool) -> Result<TokenOutput> {
    sim.answer(y, b)
}

/// Parameters of a distinguishing experiment. `None` secrets are drawn
/// uniformly per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub trials: u64,
    pub seed: u64,
    pub s0: Option<bool>,
    pub s1: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub trials: u64,
    pub adversary: String,
    pub case2_frequency: f64,
    pub empirical_advantage: f64,
    pub analytic_bound: f64,
    pub verdict: Verdict,
    /// Frequency of the distinguisher outputting 1 in the real world.
    pub real_frequency: f64,
    pub ideal_frequency: f64,
    /// Standard error of `real_frequency − ideal_frequency`.
    pub sigma: f64,
    /// Most ideal-memory calls made by one simulator; never above 1.
    pub max_ideal_calls: usize,
}

impl ExperimentReport {
    pub const CSV_HEADER: [&'static str; 9] = [
        "seed",
        "n",
        "m",
        "trials",
        "adversary",
        "case2_frequency",
        "empirical_advantage",
        "analytic_bound",
        "verdict",
    ];

    pub fn csv_record(&self) -> [String; 9] {
        [
            self.seed.to_string(),
            self.n.to_string(),
            self.m.to_string(),
            self.trials.to_string(),
            self.adversary.clone(),
            self.case2_frequency.to_string(),
            self.empirical_advantage.to_string(),
            self.analytic_bound.to_string(),
            if self.verdict.passed() { "pass" } else { "fail" }.to_string(),
        ]
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    real: u64,
    ideal: u64,
    case2: u64,
    max_ideal_calls: usize,
}

impl Tally {
    fn merge(self, other: Tally) -> Tally {
        Tally {
            real: self.real + other.real,
            ideal: self.ideal + other.ideal,
            case2: self.case2 + other.case2,
            max_ideal_calls: self.max_ideal_calls.max(other.max_ideal_calls),
        }
    }
}

/// Run `adversary` against the real protocol and against simulator + ideal
/// memory. Both worlds of a trial share the key, the secrets, and the
/// adversary's random stream, so the two outcomes differ only where the
/// simulator's answers do.
///
/// The distinguisher outputs 1 iff the adversary's guess for `(s0, s1)` is
/// right; bits the adversary did not extract are guessed as 0.
pub fn distinguishing_experiment(
    adversary: &dyn AttackStrategy,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if config.trials == 0 || config.m == 0 {
        return Err(Error::InvalidArgument("trials and query budget must be positive".into()));
    }
    if config.n == 0 || config.n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::InvalidSize(format!("key length {} outside 1..={MAX_STATEVECTOR_QUBITS}", config.n)));
    }
    let streams = SeedStream::new(config.seed);
    let tally = (0..config.trials)
        .into_par_iter()
        .map(|t| experiment_trial(adversary, config, &mut streams.stream(t)))
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    assert!(tally.max_ideal_calls <= 1, "ideal memory queried twice");

    let trials = config.trials as f64;
    let (p_real, p_ideal) = (tally.real as f64 / trials, tally.ideal as f64 / trials);
    let sigma = ((p_real * (1.0 - p_real) + p_ideal * (1.0 - p_ideal)) / trials).sqrt();
    let empirical_advantage = (p_real - p_ideal).abs();
    let analytic_bound = interactive_bound(config.n as u32, config.m as u64);
    Ok(ExperimentReport {
        seed: config.seed,
        n: config.n,
        m: config.m,
        trials: config.trials,
        adversary: adversary.name().to_string(),
        case2_frequency: tally.case2 as f64 / trials,
        empirical_advantage,
        analytic_bound,
        verdict: Verdict::from_pass(empirical_advantage <= analytic_bound + 3.0 * sigma),
        real_frequency: p_real,
        ideal_frequency: p_ideal,
        sigma,
        max_ideal_calls: tally.max_ideal_calls,
    })
}

fn experiment_trial(adversary: &dyn AttackStrategy, config: &ExperimentConfig, rng: &mut TrialRng) -> Result<Tally> {
    let s0 = config.s0.unwrap_or_else(|| rng.random());
    let s1 = config.s1.unwrap_or_else(|| rng.random());
    let key = BB84Key::random(config.n, rng);
    let quantum_key = QuantumKey::prepare(&key)?;
    let guessed_both =
        |extracted: [Option<bool>; 2]| extracted[0].unwrap_or(false) == s0 && extracted[1].unwrap_or(false) == s1;

    let mut real_rng = rng.clone();
    let mut wrap = WrapInstance::new(TokenProgram::new(s0, s1, key.clone()), config.m);
    let real = adversary.run(&quantum_key, &mut wrap, &mut real_rng)?;

    let mut ideal_rng = rng.clone();
    let mut sim = SimulatorState::new(key, IdealOtm::new(s0, s1), config.m);
    let ideal = adversary.run(&quantum_key, &mut sim, &mut ideal_rng)?;

    Ok(Tally {
        real: guessed_both(real.extracted) as u64,
        ideal: guessed_both(ideal.extracted) as u64,
        case2: sim.case2() as u64,
        max_ideal_calls: sim.ideal_calls(),
    })
}

/// Honest-protocol correctness over many runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub seed: u64,
    pub n: usize,
    pub trials: u64,
    /// Runs in which the receiver obtained `s_b`.
    pub correct: u64,
    /// Runs in which the token rejected the honest query.
    pub rejected: u64,
    pub verdict: Verdict,
}

impl ProtocolReport {
    pub const CSV_HEADER: [&'static str; 6] = ["seed", "n", "trials", "correct", "rejected", "verdict"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.seed.to_string(),
            self.n.to_string(),
            self.trials.to_string(),
            self.correct.to_string(),
            self.rejected.to_string(),
            if self.verdict.passed() { "pass" } else { "fail" }.to_string(),
        ]
    }
}

/// Run the honest protocol `config.trials` times with a uniformly random
/// choice bit per run. Passes iff every run returns `s_b`.
pub fn run_honest_trials(config: &ExperimentConfig) -> Result<ProtocolReport> {
    if config.trials == 0 || config.m == 0 {
        return Err(Error::InvalidArgument("trials and query budget must be positive".into()));
    }
    let streams = SeedStream::new(config.seed);
    let (correct, rejected) = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = streams.stream(t);
            let s0 = config.s0.unwrap_or_else(|| rng.random());
            let s1 = config.s1.unwrap_or_else(|| rng.random());
            let b: bool = rng.random();
            let mut out = sender_create_with_budget(s0, s1, config.n, config.m, &mut rng)?;
            match honest_receiver_execute(b, &mut out, &mut rng) {
                Ok(s) => Ok(((s == if b { s1 } else { s0 }) as u64, 0)),
                Err(Error::HonestRejected) => Ok((0, 1)),
                Err(e) => Err(e),
            }
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(ProtocolReport {
        seed: config.seed,
        n: config.n,
        trials: config.trials,
        correct,
        rejected,
        verdict: Verdict::from_pass(correct == config.trials),
    })
}
