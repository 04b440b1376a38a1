//! The two Orlicz norms on `ℝⁿ` and quantities built from them.
//!
//! * `‖x‖_ψ = inf{λ > 0 : (1/(en)) Σ e^{|xᵢ|/λ} ≤ 1}`
//! * `‖x‖_log = inf{λ > 0 : (1/n) Σ (|xᵢ|/λ) ln₊(|xᵢ|/λ) ≤ 1}`
//!
//! Both constraint functions are monotone in `λ`, so the infimum is found by
//! bracketed bisection. The brackets follow from the elementary comparisons
//! `‖x‖_ψ ≤ ‖x‖_∞ ≤ ln(en)‖x‖_ψ` and `‖x‖₁ ≤ en‖x‖_log`.

use thiserror::Error;

use crate::matrix::{norm2, DenseMatrix};

/// Relative bisection tolerance.
pub const REL_TOL: f64 = 1e-12;
/// Bisection iteration cap.
pub const MAX_ITER: usize = 200;
/// Default cap for the implicit constants of the elementary `ψ`/`log`
/// support estimates. Used only for diagnostic reports.
pub const ELEMENTARY_CONSTANT_CAP: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("norm of an empty vector is undefined")]
    Empty,
    #[error("vector entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("weights must be non-negative and sum to a positive value")]
    BadWeights,
    #[error("no level-set witness found for k ≤ {kmax} (vector is probably not ψ-normalized, ψ = {psi})")]
    NoWitness { kmax: u32, psi: f64 },
}

fn check(x: &[f64]) -> Result<(), NormError> {
    if x.is_empty() {
        return Err(NormError::Empty);
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(NormError::NonFinite { index });
    }
    Ok(())
}

/// `ln₊(t) = max(0, ln t)`, with `ln₊(0) = 0`.
pub fn ln_plus(t: f64) -> f64 {
    if t > 1.0 {
        t.ln()
    } else {
        0.0
    }
}

/// Exponential Orlicz norm `‖x‖_ψ`.
pub fn psi_norm(x: &[f64]) -> Result<f64, NormError> {
    check(x)?;
    let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    Ok(psi_norm_abs_weighted(&abs, None))
}

/// `‖·‖_ψ` of a vector given as distinct magnitudes with multiplicities.
///
/// The norm of `x` only depends on the multiset `{|xᵢ|}`; callers that know
/// their vector takes few distinct values can pass `(value, count)` pairs.
pub fn psi_norm_weighted(values: &[f64], weights: &[f64]) -> Result<f64, NormError> {
    check(values)?;
    if values.len() != weights.len()
        || weights.iter().any(|w| !w.is_finite() || *w < 0.0)
        || weights.iter().sum::<f64>() <= 0.0
    {
        return Err(NormError::BadWeights);
    }
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    Ok(psi_norm_abs_weighted(&abs, Some(weights)))
}

/// `ln( Σ wᵢ e^{aᵢ/λ} )`, evaluated with the maximum factored out.
fn log_sum_exp_scaled(abs: &[f64], weights: Option<&[f64]>, max: f64, lambda: f64) -> f64 {
    let s: f64 = match weights {
        Some(w) => abs
            .iter()
            .zip(w)
            .map(|(a, wi)| wi * ((a - max) / lambda).exp())
            .sum(),
        None => abs.iter().map(|a| ((a - max) / lambda).exp()).sum(),
    };
    max / lambda + s.ln()
}

fn psi_norm_abs_weighted(abs: &[f64], weights: Option<&[f64]>) -> f64 {
    let max = abs.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let total: f64 = match weights {
        Some(w) => w.iter().sum(),
        None => abs.len() as f64,
    };
    // feasible  <=>  ln Σ e^{a/λ} ≤ 1 + ln(total)
    let threshold = 1.0 + total.ln();
    let feasible = |lambda: f64| log_sum_exp_scaled(abs, weights, max, lambda) <= threshold;
    let mut lo = max / threshold;
    let mut hi = max;
    if feasible(lo) {
        return lo;
    }
    for _ in 0..MAX_ITER {
        if hi - lo <= REL_TOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Normalized `ψ` constraint `(1/(en)) Σ e^{|xᵢ|/λ}`; equals 1 at `λ = ‖x‖_ψ`.
pub fn psi_constraint(x: &[f64], lambda: f64) -> f64 {
    let n = x.len() as f64;
    x.iter().map(|v| (v.abs() / lambda).exp()).sum::<f64>() / (std::f64::consts::E * n)
}

/// `log` constraint `(1/n) Σ (|xᵢ|/λ) ln₊(|xᵢ|/λ)`; equals 1 at `λ = ‖x‖_log`.
pub fn log_constraint(x: &[f64], lambda: f64) -> f64 {
    let n = x.len() as f64;
    x.iter()
        .map(|v| {
            let t = v.abs() / lambda;
            t * ln_plus(t)
        })
        .sum::<f64>()
        / n
}

/// `t ln t`-type Orlicz norm `‖x‖_log`.
pub fn log_norm(x: &[f64]) -> Result<f64, NormError> {
    check(x)?;
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 == 0.0 {
        return Ok(0.0);
    }
    let n = x.len() as f64;
    let infeasible = |lambda: f64| log_constraint(x, lambda) > 1.0;
    let mut hi = l1;
    let mut lo = l1 / (std::f64::consts::E * n);
    // The lower bracket is infeasible up to rounding; widen it if not.
    let mut widen = 0;
    while !infeasible(lo) && widen < 64 {
        hi = lo;
        lo *= 0.5;
        widen += 1;
    }
    for _ in 0..MAX_ITER {
        if hi - lo <= REL_TOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if infeasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Least `k ≥ 1` with `|{i : |xᵢ| ≥ k/2}| ≥ n (2e)^{-k}`, searched up to
/// `k ≤ 2 ln(en)`. Expects `‖x‖_ψ = 1`.
pub fn psi_level_witness(x: &[f64]) -> Result<u32, NormError> {
    check(x)?;
    let n = x.len() as f64;
    let kmax = (2.0 * (std::f64::consts::E * n).ln()).floor() as u32;
    for k in 1..=kmax {
        let level = k as f64 / 2.0;
        let count = x.iter().filter(|v| v.abs() >= level).count() as f64;
        if count >= n * (2.0 * std::f64::consts::E).powi(-(k as i32)) {
            return Ok(k);
        }
    }
    Err(NormError::NoWitness {
        kmax,
        psi: psi_norm(x)?,
    })
}

/// Row shift `Δ(Q) = √d Σᵢ ‖rowᵢ(Q)‖_log`.
pub fn shift_delta(q: &DenseMatrix, d: u32) -> Result<f64, NormError> {
    let mut total = 0.0;
    for i in 0..q.rows() {
        total += log_norm(q.row(i))?;
    }
    Ok((d as f64).sqrt() * total)
}

/// `Δ(x yᵀ)` without materializing the outer product.
pub fn shift_delta_rank_one(x: &[f64], y: &[f64], d: u32) -> Result<f64, NormError> {
    let ly = log_norm(y)?;
    Ok((d as f64).sqrt() * x.iter().map(|v| v.abs()).sum::<f64>() * ly)
}

/// Observed value of an implicit constant next to its configured cap.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConstantRatio {
    pub ratio: f64,
    pub cap: f64,
    pub within_cap: bool,
}

impl ConstantRatio {
    fn new(ratio: f64, cap: f64) -> Self {
        Self {
            ratio,
            cap,
            within_cap: ratio <= cap,
        }
    }
}

fn support_size(y: &[f64]) -> usize {
    y.iter().filter(|v| **v != 0.0).count()
}

/// `‖y‖₂ / (√m ‖y‖_ψ ln(2n/m))` with `m = |supp y|`.
pub fn elementary_psi_ratio(y: &[f64], cap: f64) -> Result<ConstantRatio, NormError> {
    check(y)?;
    let m = support_size(y);
    if m == 0 {
        return Ok(ConstantRatio::new(0.0, cap));
    }
    let n = y.len() as f64;
    let m = m as f64;
    let ratio = norm2(y) / (m.sqrt() * psi_norm(y)? * (2.0 * n / m).ln());
    Ok(ConstantRatio::new(ratio, cap))
}

/// `n ‖y‖_log / (‖y‖₂ √m ln(2n/m))` with `m = |supp y|`.
pub fn elementary_log_ratio(y: &[f64], cap: f64) -> Result<ConstantRatio, NormError> {
    check(y)?;
    let m = support_size(y);
    if m == 0 {
        return Ok(ConstantRatio::new(0.0, cap));
    }
    let n = y.len() as f64;
    let m = m as f64;
    let ratio = n * log_norm(y)? / (norm2(y) * m.sqrt() * (2.0 * n / m).ln());
    Ok(ConstantRatio::new(ratio, cap))
}

/// `Δ(x yᵀ) / (√d ‖x‖ ‖y‖)`, compared against the same cap.
pub fn rank_one_shift_ratio(x: &[f64], y: &[f64], d: u32, cap: f64) -> Result<ConstantRatio, NormError> {
    let denom = (d as f64).sqrt() * norm2(x) * norm2(y);
    if denom == 0.0 {
        return Ok(ConstantRatio::new(0.0, cap));
    }
    Ok(ConstantRatio::new(shift_delta_rank_one(x, y, d)? / denom, cap))
}
