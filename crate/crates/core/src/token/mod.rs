//! The classical stateless token, its query-budgeted wrapper, and
//! measure-and-access memories with their oracles.

mod ma;

pub use ma::{
    make_toy_ma_memory, ClassicalOracle, MaFunction, MaMemorySpec, MaOutput, SuperpositionOracle, MA_ANCILLA_QUBITS,
    MA_ANSWER_QUBITS, MA_MAX_QUERY_QUBITS,
};

use serde::{Deserialize, Serialize};

use crate::bits::{bit_serde, BB84Key, Basis, BitString};
use crate::error::{Error, Result};

/// Query budget used when none is configured.
pub const DEFAULT_QUERY_BUDGET: usize = 1000;

/// What the token returns for one query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenOutput {
    Accept(#[serde(with = "bit_serde")] bool),
    Reject,
}

impl TokenOutput {
    pub fn is_accept(self) -> bool {
        matches!(self, TokenOutput::Accept(_))
    }

    pub fn value(self) -> Option<bool> {
        match self {
            TokenOutput::Accept(v) => Some(v),
            TokenOutput::Reject => None,
        }
    }
}

/// The hardcoded verifier: secrets `s0`, `s1` and the conjugate coding key.
///
/// Serializes as `{"s0": 0, "s1": 1, "x": "01", "theta": "+x"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenProgram {
    #[serde(with = "bit_serde")]
    pub s0: bool,
    #[serde(with = "bit_serde")]
    pub s1: bool,
    #[serde(flatten)]
    pub key: BB84Key,
}

impl TokenProgram {
    pub fn new(s0: bool, s1: bool, key: BB84Key) -> Self {
        Self { s0, s1, key }
    }

    pub fn n(&self) -> usize {
        self.key.len()
    }

    pub fn key(&self) -> &BB84Key {
        &self.key
    }

    pub fn secret(&self, b: bool) -> bool {
        if b {
            self.s1
        } else {
            self.s0
        }
    }

    /// Check the positions whose basis belongs to choice bit `b` (rectilinear for
    /// `b = 0`, diagonal for `b = 1`); accept with `s_b` iff they all agree with `x`.
    pub fn verify_query(&self, y: &BitString, b: bool) -> Result<TokenOutput> {
        if accepts(&self.key, y, b)? {
            Ok(TokenOutput::Accept(self.secret(b)))
        } else {
            Ok(TokenOutput::Reject)
        }
    }
}

/// Accept/reject verdict of the verifier; independent of the secrets.
pub fn accepts(key: &BB84Key, y: &BitString, b: bool) -> Result<bool> {
    if y.len() != key.len() {
        return Err(Error::InvalidArgument(format!("query has {} bits, key has {}", y.len(), key.len())));
    }
    let checked = if b { Basis::Diagonal } else { Basis::Rectilinear };
    Ok(key
        .theta()
        .iter()
        .zip(key.x().iter().zip(y.iter()))
        .filter(|(basis, _)| *basis == checked)
        .all(|(_, (x, y))| x == y))
}

/// The only handle attacks get on a token: classical `(y, b)` queries.
pub trait TokenAccess {
    fn query(&mut self, y: &BitString, b: bool) -> Result<TokenOutput>;

    /// Queries still allowed before the budget is exhausted.
    fn remaining(&self) -> usize;
}

/// One logged query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub y: BitString,
    #[serde(with = "bit_serde")]
    pub b: bool,
    pub output: TokenOutput,
}

/// A token program behind the wrap functionality, with a query budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WrapInstance {
    program: TokenProgram,
    query_budget: usize,
    queries_used: usize,
    log: Vec<QueryRecord>,
}

impl WrapInstance {
    pub fn new(program: TokenProgram, query_budget: usize) -> Self {
        Self { program, query_budget, queries_used: 0, log: Vec::new() }
    }

    pub fn program(&self) -> &TokenProgram {
        &self.program
    }

    pub fn query_budget(&self) -> usize {
        self.query_budget
    }

    pub fn queries_used(&self) -> usize {
        self.queries_used
    }

    pub fn log(&self) -> &[QueryRecord] {
        &self.log
    }

    /// Run the program on `(y, b)`. Malformed queries are rejected with an error
    /// before they count against the budget.
    pub fn run(&mut self, y: &BitString, b: bool) -> Result<TokenOutput> {
        if self.queries_used >= self.query_budget {
            return Err(Error::BudgetExceeded { budget: self.query_budget });
        }
        let output = self.program.verify_query(y, b)?;
        self.queries_used += 1;
        self.log.push(QueryRecord { y: y.clone(), b, output });
        Ok(output)
    }

    /// Re-evaluate every logged query against the program alone.
    pub fn replay_matches(&self) -> bool {
        self.log.iter().all(|r| self.program.verify_query(&r.y, r.b).is_ok_and(|o| o == r.output))
    }
}

impl TokenAccess for WrapInstance {
    fn query(&mut self, y: &BitString, b: bool) -> Result<TokenOutput> {
        self.run(y, b)
    }

    fn remaining(&self) -> usize {
        self.query_budget - self.queries_used
    }
}
