use crate::error::{Error, Result};

/// `α = 1/2 + 1/(2√2) = cos²(π/8)`, the single-qubit optimum.
pub fn alpha() -> f64 {
    0.5 + 0.5 * std::f64::consts::FRAC_1_SQRT_2
}

/// `C(m, 2)` as a float.
pub fn pairs(m: u64) -> f64 {
    let m = m as f64;
    m * (m - 1.0).max(0.0) / 2.0
}

/// Best probability of producing accepting keys for both choice bits from an
/// `n`-qubit key without querying the token: `α^n`.
pub fn noninteractive_bound(n: u32) -> f64 {
    alpha().powi(n as i32)
}

/// Bound on both-bit extraction with at most `m` token queries:
/// `min(1, 2·C(m,2)·α^n)`.
pub fn interactive_bound(n: u32, m: u64) -> f64 {
    (2.0 * pairs(m) * noninteractive_bound(n)).min(1.0)
}

/// Fixed-output ensemble reduction: `min(1, C(m,2)·|G|·(|G|−1)·p)`.
pub fn fixed_output_bound(m: u64, g_size: u64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} is not a probability")));
    }
    if g_size < 2 {
        return Err(Error::InvalidArgument(format!("|G| = {g_size} must be at least 2")));
    }
    let g = g_size as f64;
    Ok((pairs(m) * g * (g - 1.0) * p).min(1.0))
}
