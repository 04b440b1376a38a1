//! Edge counts between vertex sets, the two-sided discrepancy dichotomy,
//! dyadic level sets and the heavy-couple certificate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Digraph01;
use crate::matrix::norm2;

/// Allowed deviation of `‖x‖`, `‖y‖` from 1.
pub const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DiscrepancyError {
    #[error("vertex sets must be non-empty")]
    EmptySet,
    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("constants must satisfy {0}")]
    BadConstants(&'static str),
    #[error("vector length {len} does not match n = {n}")]
    Dimension { len: usize, n: usize },
    #[error("vectors must be unit (‖x‖ = {x}, ‖y‖ = {y})")]
    NotUnit { x: f64, y: f64 },
    #[error("d must be positive, got {0}")]
    BadDegree(f64),
}

/// Which of the two discrepancy conditions holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Cond1,
    Cond2,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyVerdict {
    pub edges: u64,
    /// `(d/n)|S||T|`.
    pub expected: f64,
    pub verdict: Verdict,
    /// `edges / expected`.
    pub ratio: f64,
}

fn mask(n: usize, set: &[usize]) -> Result<Vec<bool>, DiscrepancyError> {
    let mut m = vec![false; n];
    for &i in set {
        if i >= n {
            return Err(DiscrepancyError::IndexOutOfRange { index: i, n });
        }
        m[i] = true;
    }
    Ok(m)
}

/// Number of edges from `S` to `T` (sets are taken without repetition).
pub fn edge_count(g: &Digraph01, s: &[usize], t: &[usize]) -> Result<u64, DiscrepancyError> {
    let n = g.n();
    let in_s = mask(n, s)?;
    let in_t = mask(n, t)?;
    Ok((0..n)
        .filter(|&i| in_s[i])
        .map(|i| g.row(i).iter().filter(|&&j| in_t[j as usize]).count() as u64)
        .sum())
}

/// Classifies `(S, T)`: `Cond1` if `e ≤ K₁(d/n)|S||T|`, else `Cond2` if
/// `e ln(e/((d/n)|S||T|)) ≤ K₂ m ln(en/m)` with `m = max(|S|, |T|)`.
pub fn discrepancy_check(
    g: &Digraph01,
    s: &[usize],
    t: &[usize],
    k1: f64,
    k2: f64,
    d: f64,
) -> Result<DiscrepancyVerdict, DiscrepancyError> {
    if s.is_empty() || t.is_empty() {
        return Err(DiscrepancyError::EmptySet);
    }
    if !(k1 >= 1.0 && k2 >= 1.0) {
        return Err(DiscrepancyError::BadConstants("K₁, K₂ ≥ 1"));
    }
    if d.is_nan() || d <= 0.0 {
        return Err(DiscrepancyError::BadDegree(d));
    }
    let edges = edge_count(g, s, t)?;
    let (ns, nt) = (distinct(s), distinct(t));
    Ok(classify(edges, ns, nt, g.n(), k1, k2, d))
}

fn distinct(set: &[usize]) -> usize {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

fn classify(edges: u64, ns: usize, nt: usize, n: usize, k1: f64, k2: f64, d: f64) -> DiscrepancyVerdict {
    let expected = d / n as f64 * ns as f64 * nt as f64;
    let e = edges as f64;
    let ratio = e / expected;
    let verdict = if e <= k1 * expected {
        Verdict::Cond1
    } else {
        let m = ns.max(nt) as f64;
        if e * ratio.ln() <= k2 * m * (std::f64::consts::E * n as f64 / m).ln() {
            Verdict::Cond2
        } else {
            Verdict::Fail
        }
    };
    DiscrepancyVerdict { edges, expected, verdict, ratio }
}

/// `S_i = {k : 2^{i−1} ≤ √n|x_k| < 2^i}` for `i = 1..=⌈log₂√n⌉+1`; only
/// non-empty sets are returned.
pub fn dyadic_level_sets(x: &[f64]) -> Vec<(u32, Vec<usize>)> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let sq = (n as f64).sqrt();
    let top = sq.log2().ceil() as u32 + 1;
    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); top as usize];
    for (k, &v) in x.iter().enumerate() {
        let s = sq * v.abs();
        for i in 1..=top {
            if s >= 2f64.powi(i as i32 - 1) && s < 2f64.powi(i as i32) {
                sets[i as usize - 1].push(k);
                break;
            }
        }
    }
    sets.into_iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(i, s)| (i as u32 + 1, s))
        .collect()
}

/// Light and heavy parts of `Σ_{M_ij=1} xᵢ y_j`; a couple is heavy iff
/// `|xᵢ y_j| > √d/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupleSplit {
    pub light_sum: f64,
    pub heavy_sum: f64,
    pub heavy_count: u64,
}

pub fn couple_split_sums(g: &Digraph01, x: &[f64], y: &[f64], d: f64) -> Result<CoupleSplit, DiscrepancyError> {
    let n = g.n();
    for len in [x.len(), y.len()] {
        if len != n {
            return Err(DiscrepancyError::Dimension { len, n });
        }
    }
    let threshold = d.sqrt() / n as f64;
    let mut split = CoupleSplit { light_sum: 0.0, heavy_sum: 0.0, heavy_count: 0 };
    for (i, &xi) in x.iter().enumerate() {
        for &j in g.row(i) {
            let v = xi * y[j as usize];
            if v.abs() > threshold {
                split.heavy_sum += v;
                split.heavy_count += 1;
            } else {
                split.light_sum += v;
            }
        }
    }
    Ok(split)
}

/// `U(K₁, K₂) = 16K₁ + 24 + 32K₂ + 8K₂√(6e)/(K₁ ln K₁)`.
pub fn u_constant(k1: f64, k2: f64) -> f64 {
    16.0 * k1 + 24.0 + 32.0 * k2 + 8.0 * k2 * (6.0 * std::f64::consts::E).sqrt() / (k1 * k1.ln())
}

/// Orientation of a checked level pair: `(S_i, T_j)` in `G`, or `(T_j, S_i)`
/// in the transposed graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPair {
    pub i: u32,
    pub j: u32,
    pub orientation: Orientation,
    pub verdict: DiscrepancyVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavyCoupleCertificate {
    pub level_pairs: Vec<LevelPair>,
    pub all_pass: bool,
    pub u: f64,
    /// `2U√d`.
    pub bound: f64,
    pub heavy_sum: f64,
    pub light_sum: f64,
    pub heavy_count: u64,
    /// `all_pass ⇒ |heavy_sum| ≤ bound`.
    pub implication_holds: bool,
    /// `heavy_count ≤ n²/d`.
    pub heavy_count_ok: bool,
}

pub fn heavy_certificate(
    g: &Digraph01,
    x: &[f64],
    y: &[f64],
    k1: f64,
    k2: f64,
    d: f64,
) -> Result<HeavyCoupleCertificate, DiscrepancyError> {
    if !(k1 > 1.0 && k2 >= 1.0) {
        return Err(DiscrepancyError::BadConstants("K₁ > 1, K₂ ≥ 1"));
    }
    if d.is_nan() || d <= 0.0 {
        return Err(DiscrepancyError::BadDegree(d));
    }
    let n = g.n();
    for len in [x.len(), y.len()] {
        if len != n {
            return Err(DiscrepancyError::Dimension { len, n });
        }
    }
    let (nx, ny) = (norm2(x), norm2(y));
    if (nx - 1.0).abs() > UNIT_TOL || (ny - 1.0).abs() > UNIT_TOL {
        return Err(DiscrepancyError::NotUnit { x: nx, y: ny });
    }
    let sx = dyadic_level_sets(x);
    let ty = dyadic_level_sets(y);
    let gt = g.transpose();
    let mut level_pairs = Vec::with_capacity(2 * sx.len() * ty.len());
    for (i, s) in &sx {
        for (j, t) in &ty {
            let forward = classify(edge_count(g, s, t)?, s.len(), t.len(), n, k1, k2, d);
            let backward = classify(edge_count(&gt, t, s)?, t.len(), s.len(), n, k1, k2, d);
            level_pairs.push(LevelPair { i: *i, j: *j, orientation: Orientation::In, verdict: forward });
            level_pairs.push(LevelPair { i: *i, j: *j, orientation: Orientation::Out, verdict: backward });
        }
    }
    let all_pass = level_pairs.iter().all(|p| p.verdict.verdict != Verdict::Fail);
    let split = couple_split_sums(g, x, y, d)?;
    let u = u_constant(k1, k2);
    let bound = 2.0 * u * d.sqrt();
    Ok(HeavyCoupleCertificate {
        level_pairs,
        all_pass,
        u,
        bound,
        heavy_sum: split.heavy_sum,
        light_sum: split.light_sum,
        heavy_count: split.heavy_count,
        implication_holds: !all_pass || split.heavy_sum.abs() <= bound,
        heavy_count_ok: split.heavy_count as f64 <= (n * n) as f64 / d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DegreeSequencePair;
    use crate::rng::rng_from_seed;
    use crate::sampler::{sample_digraph, ChainConfig};
    use crate::spectral::{bilinear_form, sample_unit_pair};

    #[test]
    fn edge_count_examples() {
        let deg = DegreeSequencePair::regular(12, 4).unwrap();
        let g = sample_digraph(&deg, ChainConfig::default_for(48, 1)).unwrap();
        let all: Vec<usize> = (0..12).collect();
        assert_eq!(edge_count(&g, &all, &all).unwrap(), 48);
        assert_eq!(edge_count(&g, &[], &all).unwrap(), 0);
        let id = Digraph01::identity(3);
        assert_eq!(edge_count(&id, &[0, 1], &[1, 2]).unwrap(), 1);
        assert!(edge_count(&id, &[3], &[1]).is_err());
    }

    #[test]
    fn discrepancy_examples() {
        let deg = DegreeSequencePair::regular(12, 4).unwrap();
        let g = sample_digraph(&deg, ChainConfig::default_for(48, 2)).unwrap();
        let all: Vec<usize> = (0..12).collect();
        let v = discrepancy_check(&g, &all, &all, 1.0, 1.0, 4.0).unwrap();
        assert_eq!((v.edges, v.verdict), (48, Verdict::Cond1));
        assert_eq!(v.ratio, 1.0);
        assert!(discrepancy_check(&g, &[], &all, 1.0, 1.0, 4.0).is_err());
        assert!(discrepancy_check(&g, &all, &all, 0.5, 1.0, 4.0).is_err());

        // 6 vertices, d = 1, S = T = {0, 1}: expected 4/6, 4 edges when the
        // 2×2 block is full (degrees exceed d here, which the formula ignores)
        let h = Digraph01::from_edges(6, [(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let v = discrepancy_check(&h, &[0, 1], &[0, 1], 2.0, 1.0, 1.0).unwrap();
        let expected = 4.0 / 6.0;
        assert_eq!(v.edges, 4);
        assert!((v.expected - expected).abs() < 1e-15);
        let lhs = 4.0 * (4.0 / expected).ln();
        let rhs = 2.0 * (std::f64::consts::E * 6.0 / 2.0).ln();
        assert_eq!(v.verdict, if lhs <= rhs { Verdict::Cond2 } else { Verdict::Fail });
        let v = discrepancy_check(&h, &[0, 1], &[0, 1], 2.0, 5.0, 1.0).unwrap();
        assert_eq!(v.verdict, Verdict::Cond2);
        // 6× expected with K₁ = 6 lands in Cond1
        let v = discrepancy_check(&h, &[0, 1], &[0, 1], 6.0, 1.0, 1.0).unwrap();
        assert_eq!(v.verdict, Verdict::Cond1);
    }

    #[test]
    fn level_set_examples() {
        let n = 16;
        let u = vec![0.25; n];
        assert_eq!(dyadic_level_sets(&u), vec![(1, (0..n).collect::<Vec<_>>())]);
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        // √16·1 = 4 ∈ [2², 2³)
        assert_eq!(dyadic_level_sets(&e1), vec![(3, vec![0])]);
        assert!(dyadic_level_sets(&[0.0; 5]).is_empty());
    }

    #[test]
    fn level_sets_partition_the_large_coordinates() {
        let mut rng = rng_from_seed(3);
        for n in [2, 7, 64, 300] {
            let (x, _) = sample_unit_pair(n, &mut rng).unwrap();
            let sets = dyadic_level_sets(&x);
            let mut covered: Vec<usize> = sets.iter().flat_map(|(_, s)| s.clone()).collect();
            let total = covered.len();
            covered.sort_unstable();
            covered.dedup();
            assert_eq!(covered.len(), total);
            let big: Vec<usize> = (0..n).filter(|&k| x[k].abs() >= 1.0 / (n as f64).sqrt()).collect();
            assert_eq!(covered, big);
        }
    }

    #[test]
    fn split_examples() {
        let deg = DegreeSequencePair::regular(16, 4).unwrap();
        let g = sample_digraph(&deg, ChainConfig::default_for(64, 5)).unwrap();
        let u = vec![0.25; 16];
        let s = couple_split_sums(&g, &u, &u, 4.0).unwrap();
        assert_eq!(s.heavy_sum, 0.0);
        assert!((s.light_sum - 4.0).abs() < 1e-12);
        let mut e1 = vec![0.0; 16];
        e1[0] = 1.0;
        let s = couple_split_sums(&Digraph01::all_ones(16), &e1, &e1, 16.0).unwrap();
        assert_eq!((s.heavy_sum, s.heavy_count), (1.0, 1));
        let s = couple_split_sums(&g, &u, &[0.0; 16], 4.0).unwrap();
        assert_eq!((s.light_sum, s.heavy_sum), (0.0, 0.0));
    }

    #[test]
    fn certificate_examples() {
        let deg = DegreeSequencePair::regular(16, 4).unwrap();
        let g = sample_digraph(&deg, ChainConfig::default_for(64, 6)).unwrap();
        let u = vec![0.25; 16];
        let c = heavy_certificate(&g, &u, &u, 2.0, 2.0, 4.0).unwrap();
        assert!(c.all_pass && c.bound > 0.0 && c.heavy_sum == 0.0 && c.implication_holds);

        let mut e1 = vec![0.0; 16];
        e1[0] = 1.0;
        let c = heavy_certificate(&Digraph01::all_ones(16), &e1, &e1, 2.0, 2.0, 16.0).unwrap();
        assert_eq!(c.level_pairs.len(), 2);
        assert!(c.level_pairs.iter().all(|p| p.verdict.edges == 1 && p.verdict.verdict == Verdict::Cond1));
        assert_eq!(c.heavy_sum, 1.0);
        assert_eq!(c.bound, 2.0 * u_constant(2.0, 2.0) * 4.0);
        assert!(c.implication_holds);

        assert!(heavy_certificate(&g, &u, &u, 1.0, 2.0, 4.0).is_err());
        let long = vec![0.5; 16];
        assert!(matches!(heavy_certificate(&g, &long, &u, 2.0, 2.0, 4.0), Err(DiscrepancyError::NotUnit { .. })));
    }

    #[test]
    fn u_constant_value() {
        let u = u_constant(8.0, 8.0);
        let expect = 128.0 + 24.0 + 256.0 + 64.0 * (6.0 * std::f64::consts::E).sqrt() / (8.0 * 8f64.ln());
        assert!((u - expect).abs() < 1e-12);
    }

    #[test]
    fn decomposition_and_heavy_count_on_random_trials() {
        let deg = DegreeSequencePair::regular(64, 8).unwrap();
        let mut rng = rng_from_seed(9);
        for t in 0..30 {
            let g = sample_digraph(&deg, ChainConfig::default_for(512, t)).unwrap();
            let (x, y) = sample_unit_pair(64, &mut rng).unwrap();
            let c = heavy_certificate(&g, &x, &y, 8.0, 8.0, 8.0).unwrap();
            let b = bilinear_form(&g, &x, &y).unwrap();
            assert!((c.light_sum + c.heavy_sum - b).abs() <= 1e-10 * (1.0 + b.abs()));
            assert!(c.heavy_count_ok && c.implication_holds);
        }
    }
}
