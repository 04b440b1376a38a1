//! Closed-form tail and moment-generating-function bounds.
//!
//! `H(t) = (1+t)ln(1+t) − t` drives every Bennett-type exponent here and
//! `g(t) = eᵗ − t − 1` the Freedman MGF bound.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TailError {
    #[error("argument must be non-negative and finite, got {0}")]
    Domain(f64),
    #[error("martingale parameters need M > 0 and σ² ≥ 0 (got M = {m}, σ² = {sigma2})")]
    BadParams { m: f64, sigma2: f64 },
    #[error("at least one martingale part is required")]
    NoParts,
    #[error("degenerate matrix statistics: {0}")]
    DegenerateQ(&'static str),
    #[error("γ must lie in (0, 1], got {0}")]
    BadGamma(f64),
}

const SERIES_CUTOFF: f64 = 1e-4;

fn non_negative(t: f64) -> Result<f64, TailError> {
    if t >= 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(TailError::Domain(t))
    }
}

/// `H(t) = (1+t) ln(1+t) − t`.
pub fn h_func(t: f64) -> Result<f64, TailError> {
    Ok(h_unchecked(non_negative(t)?))
}

fn h_unchecked(t: f64) -> f64 {
    if t < SERIES_CUTOFF {
        // Σ_{k≥2} (−1)^k t^k / (k(k−1))
        let t2 = t * t;
        t2 / 2.0 - t2 * t / 6.0 + t2 * t2 / 12.0 - t2 * t2 * t / 20.0
    } else {
        (1.0 + t) * t.ln_1p() - t
    }
}

/// `g(t) = eᵗ − t − 1`.
pub fn g_func(t: f64) -> Result<f64, TailError> {
    let t = non_negative(t)?;
    Ok(if t < SERIES_CUTOFF {
        let t2 = t * t;
        t2 / 2.0 + t2 * t / 6.0 + t2 * t2 / 24.0
    } else {
        t.exp_m1() - t
    })
}

/// Difference bound `M` and quadratic-variation bound `σ²` of a martingale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleParams {
    m: f64,
    sigma2: f64,
}

impl MartingaleParams {
    pub fn new(m: f64, sigma2: f64) -> Result<Self, TailError> {
        if m > 0.0 && m.is_finite() && sigma2 >= 0.0 && sigma2.is_finite() {
            Ok(Self { m, sigma2 })
        } else {
            Err(TailError::BadParams { m, sigma2 })
        }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// Freedman's MGF bound `exp((σ²/M²) g(λM))`.
pub fn freedman_mgf_bound(lambda: f64, p: MartingaleParams) -> Result<f64, TailError> {
    let lambda = non_negative(lambda)?;
    Ok((p.sigma2 / (p.m * p.m) * g_func(lambda * p.m)?).exp())
}

/// Bennett/Freedman tail `exp(−(σ²/M²) H(Mt/σ²))` for `P(X_m − X_0 ≥ t)`.
pub fn bennett_tail(t: f64, p: MartingaleParams) -> Result<f64, TailError> {
    let t = non_negative(t)?;
    if p.sigma2 == 0.0 {
        return Ok(if t > 0.0 { 0.0 } else { 1.0 });
    }
    let arg = p.m * t / p.sigma2;
    Ok((-(p.sigma2 / (p.m * p.m)) * h_unchecked(arg)).exp())
}

/// Bernstein form `exp(−t² / (2σ² + 2Mt/3))`; never smaller than [`bennett_tail`].
pub fn bernstein_tail(t: f64, p: MartingaleParams) -> Result<f64, TailError> {
    let t = non_negative(t)?;
    if p.sigma2 == 0.0 {
        return Ok(if t > 0.0 { 0.0 } else { 1.0 });
    }
    Ok((-(t * t) / (2.0 * p.sigma2 + 2.0 * p.m * t / 3.0)).exp())
}

/// Tail of a sum of martingales with parameters `(Mᵢ, σᵢ²)`:
/// Bennett with `M = max Mᵢ` and `σ² = Σ σᵢ²`.
pub fn sum_tail_bound(t: f64, parts: &[MartingaleParams]) -> Result<f64, TailError> {
    if parts.is_empty() {
        return Err(TailError::NoParts);
    }
    let m = parts.iter().map(|p| p.m).fold(0.0, f64::max);
    let sigma2 = parts.iter().map(|p| p.sigma2).sum();
    bennett_tail(t, MartingaleParams::new(m, sigma2)?)
}

/// Matrix statistics entering the linear-form deviation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QStats {
    /// `‖Q‖²_HS`
    pub hs2: f64,
    /// `‖Q‖_∞` (largest absolute entry)
    pub qinf: f64,
    pub n: u32,
    pub d: u32,
}

impl QStats {
    pub fn of_matrix(q: &crate::DenseMatrix, d: u32) -> Self {
        Self {
            hs2: q.hs_norm_sq(),
            qinf: q.max_abs(),
            n: q.rows() as u32,
            d,
        }
    }
}

/// `2 exp(−(d‖Q‖²_HS / (n‖Q‖²_∞)) H(γ t n ‖Q‖_∞ / (d ‖Q‖²_HS)))`.
///
/// `γ` is an unknown absolute constant in the underlying inequality; callers
/// fit it empirically (default 1).
pub fn linear_form_tail_bound(t: f64, q: QStats, gamma: f64) -> Result<f64, TailError> {
    let t = non_negative(t)?;
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(TailError::BadGamma(gamma));
    }
    if q.qinf.is_nan() || q.hs2.is_nan() || q.qinf <= 0.0 || q.hs2 <= 0.0 {
        return Err(TailError::DegenerateQ("‖Q‖_∞ and ‖Q‖_HS must be positive"));
    }
    if q.n == 0 || q.d == 0 {
        return Err(TailError::DegenerateQ("n and d must be positive"));
    }
    let (n, d) = (q.n as f64, q.d as f64);
    let scale = d * q.hs2 / (n * q.qinf * q.qinf);
    let arg = gamma * t * n * q.qinf / (d * q.hs2);
    Ok(2.0 * (-scale * h_unchecked(arg)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, LN_2};

    #[test]
    fn h_examples() {
        assert_eq!(h_func(0.0).unwrap(), 0.0);
        assert!((h_func(E - 1.0).unwrap() - 1.0).abs() <= 1e-12);
        assert_relative_eq!(h_func(1.0).unwrap(), 2.0 * LN_2 - 1.0, max_relative = 1e-14);
        assert_relative_eq!(h_func(1.0).unwrap(), 0.386_294_4, epsilon = 1e-7);
        assert!(h_func(-0.1).is_err());
    }

    #[test]
    fn h_series_is_continuous_at_cutoff() {
        let below = h_unchecked(SERIES_CUTOFF * (1.0 - 1e-9));
        let above = h_unchecked(SERIES_CUTOFF * (1.0 + 1e-9));
        assert_relative_eq!(below, above, max_relative = 1e-7);
        // t²/2 leading order
        assert_relative_eq!(h_unchecked(1e-8), 0.5e-16, max_relative = 1e-7);
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_func(0.0).unwrap(), 0.0);
        assert_relative_eq!(g_func(LN_2).unwrap(), 1.0 - LN_2, max_relative = 1e-14);
        assert_relative_eq!(g_func(1.0).unwrap(), E - 2.0, max_relative = 1e-14);
        assert!(g_func(-1.0).is_err());
    }

    #[test]
    fn mgf_examples() {
        let p = MartingaleParams::new(1.0, 1.0).unwrap();
        assert_eq!(freedman_mgf_bound(0.0, p).unwrap(), 1.0);
        assert_relative_eq!(freedman_mgf_bound(1.0, p).unwrap(), (E - 2.0).exp(), max_relative = 1e-14);
        let p = MartingaleParams::new(2.0, 4.0).unwrap();
        assert_relative_eq!(freedman_mgf_bound(0.5, p).unwrap(), (E - 2.0).exp(), max_relative = 1e-14);
    }

    #[test]
    fn bennett_and_bernstein_examples() {
        let p = MartingaleParams::new(1.0, 1.0).unwrap();
        assert_eq!(bennett_tail(0.0, p).unwrap(), 1.0);
        assert_relative_eq!(bennett_tail(E - 1.0, p).unwrap(), (-1.0f64).exp(), max_relative = 1e-12);
        let p3 = MartingaleParams::new(3.0, 9.0).unwrap();
        assert_relative_eq!(bennett_tail(3.0 * (E - 1.0), p3).unwrap(), (-1.0f64).exp(), max_relative = 1e-12);
        assert_eq!(bernstein_tail(0.0, p).unwrap(), 1.0);
        assert_relative_eq!(bernstein_tail(1.0, p).unwrap(), (-3.0f64 / 8.0).exp(), max_relative = 1e-14);
        assert!(bernstein_tail(E - 1.0, p).unwrap() >= (-1.0f64).exp());
    }

    #[test]
    fn zero_variance_limit() {
        let p = MartingaleParams::new(1.0, 0.0).unwrap();
        assert_eq!(bennett_tail(0.0, p).unwrap(), 1.0);
        assert_eq!(bennett_tail(0.5, p).unwrap(), 0.0);
        assert_eq!(bernstein_tail(0.5, p).unwrap(), 0.0);
        assert!(MartingaleParams::new(0.0, 1.0).is_err());
        assert!(MartingaleParams::new(1.0, -1.0).is_err());
    }

    #[test]
    fn sum_tail_examples() {
        let p = MartingaleParams::new(1.0, 1.0).unwrap();
        assert_eq!(sum_tail_bound(1.3, &[p]).unwrap(), bennett_tail(1.3, p).unwrap());
        assert_relative_eq!(sum_tail_bound(2.0 * (E - 1.0), &[p, p]).unwrap(), (-2.0f64).exp(), max_relative = 1e-12);
        assert_eq!(sum_tail_bound(0.0, &[p, p]).unwrap(), 1.0);
        assert_eq!(sum_tail_bound(1.0, &[]), Err(TailError::NoParts));
    }

    #[test]
    fn linear_form_tail_examples() {
        let q = QStats { hs2: 1.0, qinf: 1.0, n: 100, d: 25 };
        assert_eq!(linear_form_tail_bound(0.0, q, 1.0).unwrap(), 2.0);
        let t = (E - 1.0) * 25.0 / 100.0;
        assert_relative_eq!(linear_form_tail_bound(t, q, 1.0).unwrap(), 2.0 * (-0.25f64).exp(), max_relative = 1e-12);
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let v = linear_form_tail_bound(i as f64 * 0.1, q, 0.5).unwrap();
            assert!(v <= prev);
            prev = v;
        }
        assert!(linear_form_tail_bound(1.0, QStats { hs2: 0.0, ..q }, 1.0).is_err());
        assert!(linear_form_tail_bound(1.0, q, 1.5).is_err());
    }

    #[test]
    fn min_h_inequality_on_grid() {
        for i in 0..=10_000 {
            let t = i as f64 * 0.01;
            let h = h_func(t).unwrap();
            assert!(h >= t * t / (2.0 * (1.0 + t / 3.0)) - 1e-12, "t = {t}");
        }
    }

    #[test]
    fn g_ratio_monotone() {
        for lambda in [0.1, 0.5, 1.0, 3.0] {
            let mut prev = 0.0;
            for i in 1..2000 {
                let t = i as f64 * 0.005;
                let v = g_func(lambda * t).unwrap() / (t * t);
                assert!(v >= prev * (1.0 - 1e-12), "λ={lambda} t={t}");
                prev = v;
            }
        }
    }

    #[test]
    fn bennett_below_bernstein_and_in_unit_interval() {
        for (m, s2) in [(1.0, 1.0), (0.5, 3.0), (4.0, 0.2)] {
            let p = MartingaleParams::new(m, s2).unwrap();
            for i in 0..500 {
                let t = i as f64 * 0.05;
                let b = bennett_tail(t, p).unwrap();
                let bb = bernstein_tail(t, p).unwrap();
                assert!(b <= bb * (1.0 + 1e-12));
                assert!(b > 0.0 || t > 0.0);
                assert!(b <= 1.0 && bb <= 1.0);
            }
        }
    }
}
