//! Attacks on the one-time memory: the optimal Breidbart measurement, baselines,
//! adaptive multi-query guessing, and the two impossibility attacks on
//! measure-and-access memories.

mod memory;

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_8;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{BB84Key, Basis, BasisString, BitString};
use crate::bounds::{interactive_bound, noninteractive_bound};
use crate::error::{Error, Result};
use crate::protocol::{honest_query, ExperimentConfig, Verdict};
use crate::quantum::{prepare_bb84, rotation_to_computational, QuantumKey, MAX_STATEVECTOR_QUBITS};
use crate::rng::{SeedStream, TrialRng};
use crate::token::{accepts, TokenAccess, TokenOutput, TokenProgram, WrapInstance};

pub use memory::{
    bounded_key_attack, bounded_key_success_probability, rewinding_attack, run_bounded_key_trials,
    run_rewinding_trials, BoundedKeyReport, BoundedKeySampler, MemoryAttackConfig, RewindOutcome, RewindReport,
};

/// Strategy names accepted by [`strategy_by_name`].
pub const STRATEGY_NAMES: [&str; 4] = ["honest", "breidbart", "naive-z", "adaptive-guess"];
/// Every attack name, including the two attacks on measure-and-access memories.
pub const ATTACK_NAMES: [&str; 6] = ["honest", "breidbart", "naive-z", "adaptive-guess", "rewind", "bounded-key"];

/// What an adversary got out of one quantum key and its token access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AttackResult {
    pub extracted: [Option<bool>; 2],
    pub queries_made: usize,
    /// Accepting queries occurred for both `b = 0` and `b = 1`.
    pub both_accepted: bool,
}

/// An adversary holding one quantum key and classical token access.
pub trait AttackStrategy: Send + Sync {
    fn name(&self) -> &str;

    fn run(&self, key: &QuantumKey, token: &mut dyn TokenAccess, rng: &mut TrialRng) -> Result<AttackResult>;

    /// Closed-form both-accept probability when known.
    fn reference_probability(&self, _n: usize, _m: usize) -> Option<f64> {
        None
    }
}

/// Bookkeeping for a sequence of classical queries.
#[derive(Debug, Default)]
struct Session {
    result: AttackResult,
    accepted: [bool; 2],
}

impl Session {
    /// Issue `(y, b)` unless the budget is spent. Returns `None` when it is.
    fn ask(&mut self, token: &mut dyn TokenAccess, y: &BitString, b: bool) -> Result<Option<TokenOutput>> {
        if token.remaining() == 0 {
            return Ok(None);
        }
        let out = token.query(y, b)?;
        self.result.queries_made += 1;
        if let TokenOutput::Accept(s) = out {
            self.accepted[b as usize] = true;
            self.result.extracted[b as usize].get_or_insert(s);
        }
        Ok(Some(out))
    }

    fn finish(mut self) -> AttackResult {
        self.result.both_accepted = self.accepted[0] && self.accepted[1];
        self.result
    }
}

/// Measure every qubit in the Breidbart basis and submit the outcome for both
/// choice bits.
#[derive(Debug, Clone, Copy, Default)]
pub struct Breidbart;

impl AttackStrategy for Breidbart {
    fn name(&self) -> &str {
        "breidbart"
    }

    fn run(&self, key: &QuantumKey, token: &mut dyn TokenAccess, rng: &mut TrialRng) -> Result<AttackResult> {
        let angles = vec![FRAC_PI_8; key.num_qubits()];
        let (y, _) = key.measure_in_rotated_basis(&angles, rng)?;
        let mut session = Session::default();
        session.ask(token, &y, false)?;
        session.ask(token, &y, true)?;
        Ok(session.finish())
    }

    fn reference_probability(&self, n: usize, m: usize) -> Option<f64> {
        Some(if m >= 2 { noninteractive_bound(n as u32) } else { 0.0 })
    }
}

/// Measure computationally and submit the outcome for both choice bits.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveZ;

impl AttackStrategy for NaiveZ {
    fn name(&self) -> &str {
        "naive-z"
    }

    fn run(&self, key: &QuantumKey, token: &mut dyn TokenAccess, rng: &mut TrialRng) -> Result<AttackResult> {
        let (y, _) = key.measure_computational(rng);
        let mut session = Session::default();
        session.ask(token, &y, false)?;
        session.ask(token, &y, true)?;
        Ok(session.finish())
    }

    fn reference_probability(&self, n: usize, m: usize) -> Option<f64> {
        Some(if m >= 2 { 0.75f64.powi(n as i32) } else { 0.0 })
    }
}

/// Measure computationally, secure `s0`, then spend the remaining queries on
/// `b = 1`: first the measured string, then fresh uniformly random strings
/// not tried before.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveGuess {
    pub max_queries: usize,
}

impl AttackStrategy for AdaptiveGuess {
    fn name(&self) -> &str {
        "adaptive-guess"
    }

    fn run(&self, key: &QuantumKey, token: &mut dyn TokenAccess, rng: &mut TrialRng) -> Result<AttackResult> {
        let n = key.num_qubits();
        let (y, _) = key.measure_computational(rng);
        let mut session = Session::default();
        let mut budget = self.max_queries;
        let mut spend = |session: &mut Session, token: &mut dyn TokenAccess, y: &BitString, b: bool| {
            if budget == 0 {
                return Ok(None);
            }
            budget -= 1;
            session.ask(token, y, b)
        };
        spend(&mut session, token, &y, false)?;
        let mut tried = HashSet::from([y.clone()]);
        let mut guess = y;
        let space = if n < 64 { 1u64 << n } else { u64::MAX };
        loop {
            match spend(&mut session, token, &guess, true)? {
                None | Some(TokenOutput::Accept(_)) => break,
                Some(TokenOutput::Reject) => {}
            }
            if tried.len() as u64 >= space {
                break;
            }
            guess = loop {
                let candidate = BitString::random(n, rng);
                if tried.insert(candidate.clone()) {
                    break candidate;
                }
            };
        }
        Ok(session.finish())
    }

    fn reference_probability(&self, n: usize, m: usize) -> Option<f64> {
        (m.min(self.max_queries) <= 2).then(|| NaiveZ.reference_probability(n, m.min(self.max_queries)).unwrap())
    }
}

/// The honest receiver: learns exactly one bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct HonestSingleChoice {
    /// Fixed choice bit, or uniform per run when `None`.
    pub choice: Option<bool>,
}

impl AttackStrategy for HonestSingleChoice {
    fn name(&self) -> &str {
        "honest"
    }

    fn run(&self, key: &QuantumKey, token: &mut dyn TokenAccess, rng: &mut TrialRng) -> Result<AttackResult> {
        let b = self.choice.unwrap_or_else(|| rng.random());
        let mut session = Session::default();
        if token.remaining() > 0 {
            let out = honest_query(key, b, token, rng)?;
            session.result.queries_made += 1;
            if let TokenOutput::Accept(s) = out {
                session.accepted[b as usize] = true;
                session.result.extracted[b as usize] = Some(s);
            }
        }
        Ok(session.finish())
    }

    fn reference_probability(&self, _n: usize, _m: usize) -> Option<f64> {
        Some(0.0)
    }
}

/// Look up a token strategy by its CLI name. `m` is the query allowance of
/// `adaptive-guess`.
pub fn strategy_by_name(name: &str, m: usize) -> Option<Box<dyn AttackStrategy>> {
    match name {
        "honest" => Some(Box::new(HonestSingleChoice::default())),
        "breidbart" => Some(Box::new(Breidbart)),
        "naive-z" => Some(Box::new(NaiveZ)),
        "adaptive-guess" => Some(Box::new(AdaptiveGuess { max_queries: m })),
        _ => None,
    }
}

pub fn breidbart_attack(key: &QuantumKey, token: &mut dyn TokenAccess, rng: &mut TrialRng) -> Result<AttackResult> {
    Breidbart.run(key, token, rng)
}

pub fn naive_z_attack(key: &QuantumKey, token: &mut dyn TokenAccess, rng: &mut TrialRng) -> Result<AttackResult> {
    NaiveZ.run(key, token, rng)
}

pub fn adaptive_guess_attack(
    key: &QuantumKey,
    token: &mut dyn TokenAccess,
    m: usize,
    rng: &mut TrialRng,
) -> Result<AttackResult> {
    AdaptiveGuess { max_queries: m }.run(key, token, rng)
}

/// Exact probability that measuring `|x⟩_θ` qubit-wise at `angle` yields a
/// string accepted for both choice bits, averaged over all `4^n` keys. Uses the
/// dense simulator; `n ≤ 8`.
pub fn exact_both_accept_probability(n: usize, angle: f64) -> Result<f64> {
    if n == 0 || n > 8 {
        return Err(Error::InvalidSize(format!("exact enumeration supports 1 ≤ n ≤ 8, got {n}")));
    }
    let keys = 1usize << (2 * n);
    let mut total = 0.0;
    for k in 0..keys {
        let key = BB84Key::new(
            BitString::from_index(k >> n, n),
            BasisString::new(
                BitString::from_index(k & ((1 << n) - 1), n)
                    .iter()
                    .map(|d| if d { Basis::Diagonal } else { Basis::Rectilinear })
                    .collect(),
            ),
        )?;
        let mut state = prepare_bb84(&key)?;
        let rotation = rotation_to_computational(angle);
        for q in 0..n {
            state = state.apply_single_qubit(q, &rotation)?;
        }
        for (y, p) in state.probabilities().into_iter().enumerate() {
            let y = BitString::from_index(y, n);
            if accepts(&key, &y, false)? && accepts(&key, &y, true)? {
                total += p;
            }
        }
    }
    Ok(total / keys as f64)
}

/// Monte Carlo summary of one token strategy against the real protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub trials: u64,
    pub attack: String,
    pub both_accepted_frequency: f64,
    /// Frequency of extracting both secrets correctly.
    pub both_correct_frequency: f64,
    pub max_queries_made: usize,
    /// Closed-form both-accept probability, if the strategy has one.
    pub reference_probability: Option<f64>,
    pub sigma: f64,
    pub analytic_bound: f64,
    pub verdict: Verdict,
}

impl AttackReport {
    pub const CSV_HEADER: [&'static str; 12] = [
        "seed",
        "n",
        "m",
        "trials",
        "attack",
        "both_accepted_frequency",
        "both_correct_frequency",
        "max_queries_made",
        "reference_probability",
        "sigma",
        "analytic_bound",
        "verdict",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.seed.to_string(),
            self.n.to_string(),
            self.m.to_string(),
            self.trials.to_string(),
            self.attack.clone(),
            self.both_accepted_frequency.to_string(),
            self.both_correct_frequency.to_string(),
            self.max_queries_made.to_string(),
            self.reference_probability.map(|p| p.to_string()).unwrap_or_default(),
            self.sigma.to_string(),
            self.analytic_bound.to_string(),
            if self.verdict.passed() { "pass" } else { "fail" }.to_string(),
        ]
    }
}

/// Run `strategy` for `config.trials` independent trials against fresh honest
/// senders with budget `config.m`.
///
/// The verdict passes iff the both-accept frequency is at most
/// `interactive_bound(n, m)` and, when the strategy has a closed form, within
/// three binomial standard deviations of it.
pub fn run_attack_trials(strategy: &dyn AttackStrategy, config: &ExperimentConfig) -> Result<AttackReport> {
    if config.trials == 0 || config.m == 0 {
        return Err(Error::InvalidArgument("trials and query budget must be positive".into()));
    }
    if config.n == 0 || config.n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::InvalidSize(format!("key length {} outside 1..={MAX_STATEVECTOR_QUBITS}", config.n)));
    }
    let streams = SeedStream::new(config.seed);
    let (accepted, correct, max_queries) = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = streams.stream(t);
            let s0 = config.s0.unwrap_or_else(|| rng.random());
            let s1 = config.s1.unwrap_or_else(|| rng.random());
            let key = BB84Key::random(config.n, &mut rng);
            let mut wrap = WrapInstance::new(TokenProgram::new(s0, s1, key.clone()), config.m);
            let r = strategy.run(&QuantumKey::prepare(&key)?, &mut wrap, &mut rng)?;
            debug_assert!(r.queries_made <= config.m);
            Ok((r.both_accepted as u64, (r.extracted == [Some(s0), Some(s1)]) as u64, r.queries_made))
        })
        .try_reduce(|| (0, 0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2.max(b.2))))?;

    let trials = config.trials as f64;
    let freq = accepted as f64 / trials;
    let reference = strategy.reference_probability(config.n, config.m);
    let p = reference.unwrap_or(freq);
    let sigma = (p * (1.0 - p) / trials).sqrt();
    let analytic_bound = interactive_bound(config.n as u32, config.m as u64);
    let within_reference = reference.is_none_or(|r| (freq - r).abs() <= 3.0 * sigma);
    Ok(AttackReport {
        seed: config.seed,
        n: config.n,
        m: config.m,
        trials: config.trials,
        attack: strategy.name().to_string(),
        both_accepted_frequency: freq,
        both_correct_frequency: correct as f64 / trials,
        max_queries_made: max_queries,
        reference_probability: reference,
        sigma,
        analytic_bound,
        verdict: Verdict::from_pass(freq <= analytic_bound + 3.0 * sigma && within_reference),
    })
}

/// Exact both-accept probability of the Breidbart attack by enumeration.
pub fn breidbart_exact(n: usize) -> Result<f64> {
    exact_both_accept_probability(n, FRAC_PI_8)
}
