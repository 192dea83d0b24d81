//! Grid search over single-qubit projective attacks.
//!
//! Each candidate measures the key qubit at angle `a ∈ [0, π)` and writes the
//! outcome `o` to the (Z-key, X-key) registers as either `(o, o)` or `(o, 1−o)`.
//! Its both-accept probability is `Tr(J(Φ) A′)`, evaluated exactly from the
//! channel's Choi matrix.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::choi::ChoiMatrix;
use super::sdp::objective_a_prime;
use crate::error::{Error, Result};
use crate::quantum::{rotated_basis_vector, HermitianOperator};

/// Values closer than this are treated as ties and resolved toward the smaller angle.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentConvention {
    /// Outcome `o` is claimed for both bases.
    Same,
    /// Outcome `o` for the Z-key, `1 − o` for the X-key.
    Flipped,
}

impl AssignmentConvention {
    fn output(self, outcome: usize) -> usize {
        match self {
            AssignmentConvention::Same => (outcome << 1) | outcome,
            AssignmentConvention::Flipped => (outcome << 1) | (1 - outcome),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchResult {
    pub best_value: f64,
    pub best_angle: f64,
    pub convention: AssignmentConvention,
}

/// Choi matrix of the measure-and-assign channel.
pub fn attack_channel(angle: f64, convention: AssignmentConvention) -> ChoiMatrix {
    let vectors: Vec<Vec<_>> = [false, true].iter().map(|&o| rotated_basis_vector(angle, o).to_vec()).collect();
    let outputs = [convention.output(0), convention.output(1)];
    ChoiMatrix::from_measurement(&vectors, &outputs, 4).expect("well-formed measurement channel")
}

fn value(a_prime: &HermitianOperator, angle: f64, convention: AssignmentConvention) -> f64 {
    attack_channel(angle, convention).operator().trace_product(a_prime)
}

fn better(candidate: &SearchResult, incumbent: &SearchResult) -> bool {
    if candidate.best_value > incumbent.best_value + TIE_TOL {
        return true;
    }
    (candidate.best_value - incumbent.best_value).abs() <= TIE_TOL && candidate.best_angle < incumbent.best_angle
}

/// Maximize the both-accept probability over `grid_resolution` angles `kπ/res`.
pub fn numeric_search_n1(grid_resolution: usize) -> Result<SearchResult> {
    if grid_resolution < 8 {
        return Err(Error::InvalidArgument(format!("grid resolution {grid_resolution} is below 8")));
    }
    let a_prime = objective_a_prime();
    let best = (0..grid_resolution)
        .into_par_iter()
        .flat_map_iter(|k| {
            let angle = PI * k as f64 / grid_resolution as f64;
            let a_prime = &a_prime;
            [AssignmentConvention::Same, AssignmentConvention::Flipped].into_iter().map(move |convention| {
                SearchResult { best_value: value(a_prime, angle, convention), best_angle: angle, convention }
            })
        })
        .reduce_with(|a, b| if better(&b, &a) { b } else { a })
        .expect("non-empty grid");
    Ok(best)
}
