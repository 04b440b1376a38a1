//! Column/row counts `p`, dispersion vectors `P`, the interval-scan statistic,
//! the switching quantities `γ`/`δ`, codegrees, and the switching ratio
//! identity checked by exhaustive enumeration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DegreeSequencePair, Digraph01, C0};
use crate::norms::{psi_norm_weighted, NormError};
use crate::sampler::{enumerate_completions, EnumerationGuard, SamplerError};

/// Default for the codegree constant inside `γ`.
pub const DEFAULT_C_CODEGREE: f64 = 0.01;
/// Memory cap for the triangular codegree counter, in bytes.
pub const CODEGREE_MEMORY_CAP: usize = 256 << 20;

#[derive(Debug, Error)]
pub enum PstatsError {
    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("c0 must lie in (0, 1), got {0}")]
    BadC0(f64),
    #[error("stride must be at least 1")]
    BadStride,
    #[error("γ needs p_k, p_ℓ > ⌊0.9d⌋ = {floor}, got p_k = {pk}, p_ℓ = {pl}")]
    Denominator { pk: u32, pl: u32, floor: u32 },
    #[error("codegree constant must be positive, got {0}")]
    BadConstant(f64),
    #[error("invalid switching pair: {0}")]
    BadPair(String),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

/// Which margin the counts refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Col,
    Row,
}

fn mask_of(n: usize, set: &[usize]) -> Result<Vec<bool>, PstatsError> {
    let mut mask = vec![false; n];
    for &i in set {
        if i >= n {
            return Err(PstatsError::IndexOutOfRange { index: i, n });
        }
        mask[i] = true;
    }
    Ok(mask)
}

/// Col side: `p[j] = d_in[j] − |{q ∈ I : M_qj = 1}|`. Row side:
/// `p[i] = d_out[i] − |{q ∈ I : M_iq = 1}|`.
pub fn p_counts(g: &Digraph01, set: &[usize], side: Side) -> Result<Vec<u32>, PstatsError> {
    let n = g.n();
    let mask = mask_of(n, set)?;
    let mut p = match side {
        Side::Col => g.in_degrees(),
        Side::Row => g.out_degrees(),
    };
    for q in (0..n).filter(|&q| mask[q]) {
        let hits = match side {
            Side::Col => g.row(q),
            Side::Row => g.col(q),
        };
        for &j in hits {
            p[j as usize] -= 1;
        }
    }
    Ok(p)
}

/// `P[j] = Σ_ℓ |p[j] − p[ℓ]|`, by sorting and prefix sums.
pub fn dispersion(p: &[u32]) -> Vec<f64> {
    let n = p.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| p[i]);
    let total: u64 = p.iter().map(|&v| v as u64).sum();
    let mut out = vec![0.0; n];
    let mut below = 0u64;
    let mut k = 0;
    while k < n {
        let v = p[order[k]] as u64;
        let mut end = k;
        while end < n && p[order[end]] as u64 == v {
            end += 1;
        }
        let less = k as u64;
        let above = total - below - v * (end - k) as u64;
        let greater = (n - end) as u64;
        let value = (v * less - below) + (above - v * greater);
        for &i in &order[k..end] {
            out[i] = value as f64;
        }
        below += v * (end - k) as u64;
        k = end;
    }
    out
}

/// Counts kept as a histogram so dispersion and `ψ` only touch distinct values.
#[derive(Debug, Clone)]
struct CountState {
    p: Vec<u32>,
    hist: Vec<u32>,
}

impl CountState {
    fn new(p: Vec<u32>, max_value: usize) -> Self {
        let mut hist = vec![0; max_value + 1];
        for &v in &p {
            hist[v as usize] += 1;
        }
        Self { p, hist }
    }

    fn decrement(&mut self, j: usize) {
        let v = self.p[j] as usize;
        self.hist[v] -= 1;
        self.hist[v - 1] += 1;
        self.p[j] -= 1;
    }

    /// `‖P‖_ψ` computed over distinct values of `p`.
    fn psi_of_dispersion(&self) -> f64 {
        let bins: Vec<(f64, f64)> = self
            .hist
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, &c)| (v as f64, c as f64))
            .collect();
        let values: Vec<f64> = bins
            .iter()
            .map(|&(v, _)| bins.iter().map(|&(u, c)| c * (v - u).abs()).sum())
            .collect();
        let weights: Vec<f64> = bins.iter().map(|&(_, c)| c).collect();
        psi_norm_weighted(&values, &weights).expect("finite dispersion with positive weights")
    }
}

/// One scanned interval with its count vectors and `ψ`-norms of dispersion.
#[derive(Debug)]
pub struct ScanPoint<'a> {
    pub start: usize,
    pub len: usize,
    pub p_row: &'a [u32],
    pub p_col: &'a [u32],
    pub psi_row: f64,
    pub psi_col: f64,
}

/// Largest interval length scanned for a given `c0`.
pub fn max_interval_len(n: usize, c0: f64) -> usize {
    ((c0 * n as f64).floor() as usize).min(n)
}

fn scan_from(g: &Digraph01, start: usize, max_len: usize, visit: &mut dyn FnMut(ScanPoint<'_>)) {
    let n = g.n();
    let top = g.degrees().max_degree() as usize;
    let mut col = CountState::new(g.in_degrees(), top);
    let mut row = CountState::new(g.out_degrees(), top);
    let mut len = 0;
    loop {
        visit(ScanPoint {
            start,
            len,
            p_row: &row.p,
            p_col: &col.p,
            psi_row: row.psi_of_dispersion(),
            psi_col: col.psi_of_dispersion(),
        });
        if len == max_len || start + len == n {
            break;
        }
        let q = start + len;
        for &j in g.row(q) {
            col.decrement(j as usize);
        }
        for &i in g.col(q) {
            row.decrement(i as usize);
        }
        len += 1;
    }
}

fn check_scan_args(c0: f64, stride: usize) -> Result<(), PstatsError> {
    if !(c0 > 0.0 && c0 < 1.0) {
        return Err(PstatsError::BadC0(c0));
    }
    if stride == 0 {
        return Err(PstatsError::BadStride);
    }
    Ok(())
}

/// Visits every interval `[s, s+len)` with `s ≡ 0 (mod stride)` and
/// `0 ≤ len ≤ ⌊c0·n⌋`, in order of start then length.
pub fn scan_intervals(
    g: &Digraph01,
    c0: f64,
    stride: usize,
    mut visit: impl FnMut(ScanPoint<'_>),
) -> Result<(), PstatsError> {
    check_scan_args(c0, stride)?;
    let max_len = max_interval_len(g.n(), c0);
    for start in (0..g.n()).step_by(stride) {
        scan_from(g, start, max_len, &mut visit);
    }
    Ok(())
}

/// Default stride: 1 up to `n = 512`, else `⌈n/512⌉`.
pub fn default_stride(n: usize) -> usize {
    if n <= 512 {
        1
    } else {
        n.div_ceil(512)
    }
}

/// Maximizing interval of the scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpScan {
    pub statistic: f64,
    pub start: usize,
    pub len: usize,
    pub intervals: usize,
}

/// `max_I max(‖P^row(I)‖_ψ, ‖P^col(I)‖_ψ) / (n√d)` over scanned intervals,
/// with `d` the largest degree.
pub fn ep_statistic(g: &Digraph01, c0: f64, stride: usize) -> Result<f64, PstatsError> {
    Ok(ep_scan(g, c0, stride)?.statistic)
}

pub fn ep_scan(g: &Digraph01, c0: f64, stride: usize) -> Result<EpScan, PstatsError> {
    check_scan_args(c0, stride)?;
    let n = g.n();
    let d = g.degrees().max_degree();
    let norm = n as f64 * (d.max(1) as f64).sqrt();
    let max_len = max_interval_len(n, c0);
    let starts: Vec<usize> = (0..n).step_by(stride).collect();
    let per_start = |start: usize| {
        let mut best = EpScan { statistic: f64::NEG_INFINITY, start, len: 0, intervals: 0 };
        scan_from(g, start, max_len, &mut |pt| {
            let s = pt.psi_row.max(pt.psi_col) / norm;
            best.intervals += 1;
            if s > best.statistic {
                best.statistic = s;
                best.len = pt.len;
            }
        });
        best
    };
    #[cfg(feature = "parallel")]
    let results: Vec<EpScan> = {
        use rayon::prelude::*;
        starts.par_iter().map(|&s| per_start(s)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<EpScan> = starts.iter().map(|&s| per_start(s)).collect();
    let intervals = results.iter().map(|r| r.intervals).sum();
    // first maximum in (start, len) order
    let mut best = results
        .into_iter()
        .reduce(|a, b| if b.statistic > a.statistic { b } else { a })
        .unwrap_or(EpScan { statistic: 0.0, start: 0, len: 0, intervals: 0 });
    best.intervals = intervals;
    Ok(best)
}

/// `γ_{k,ℓ}`, `γ_{ℓ,k}` and `δ_{k,ℓ}` for counts `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaDelta {
    pub gamma_kl: f64,
    pub gamma_lk: f64,
    pub delta_kl: f64,
    pub c_codegree: f64,
    /// `40|p_k − p_ℓ|/d + 4e^{−cd}`.
    pub easy_bound: f64,
    /// Whether `δ ≤ easy_bound`, reported when both counts are in the
    /// strong range `[(1−2c₀)(1−c₀)d, d]`.
    pub easy_bound_holds: Option<bool>,
}

fn gamma(pk: f64, pl: f64, floor: f64, cd: f64) -> f64 {
    let branch = if pl < pk { pl / pk } else { 1.0 + (pl - pk) / (pk - floor) };
    branch / (1.0 - (-cd).exp())
}

pub fn gamma_delta(p: &[u32], d: u32, k: usize, l: usize, c: f64) -> Result<GammaDelta, PstatsError> {
    let n = p.len();
    for idx in [k, l] {
        if idx >= n {
            return Err(PstatsError::IndexOutOfRange { index: idx, n });
        }
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(PstatsError::BadConstant(c));
    }
    let floor = (0.9 * d as f64).floor() as u32;
    let (pk, pl) = (p[k], p[l]);
    if pk <= floor || pl <= floor {
        return Err(PstatsError::Denominator { pk, pl, floor });
    }
    let cd = c * d as f64;
    let gamma_kl = gamma(pk as f64, pl as f64, floor as f64, cd);
    let gamma_lk = gamma(pl as f64, pk as f64, floor as f64, cd);
    let delta_kl = [gamma_kl, gamma_lk]
        .iter()
        .flat_map(|&g| [(1.0 - g).abs(), (1.0 - 1.0 / g).abs()])
        .fold(0.0, f64::max);
    let easy_bound = 40.0 * (pk as f64 - pl as f64).abs() / d as f64 + 4.0 * (-cd).exp();
    let strong_lo = (1.0 - 2.0 * C0) * (1.0 - C0) * d as f64;
    let strong = [pk, pl].iter().all(|&v| v as f64 >= strong_lo && v <= d);
    Ok(GammaDelta {
        gamma_kl,
        gamma_lk,
        delta_kl,
        c_codegree: c,
        easy_bound,
        easy_bound_holds: strong.then_some(delta_kl <= easy_bound),
    })
}

/// `max_{i≠j} |supp col_i ∩ supp col_j ∩ Iᶜ|`.
pub fn codegree_max(g: &Digraph01, set: &[usize]) -> Result<u32, PstatsError> {
    codegree_max_with_cap(g, set, CODEGREE_MEMORY_CAP)
}

/// As [`codegree_max`], processing column blocks so that the counter stays
/// under `cap_bytes`.
pub fn codegree_max_with_cap(g: &Digraph01, set: &[usize], cap_bytes: usize) -> Result<u32, PstatsError> {
    let n = g.n();
    let excluded = mask_of(n, set)?;
    if n < 2 {
        return Ok(0);
    }
    let block = (cap_bytes / (4 * n)).clamp(1, n);
    let mut best = 0;
    let mut counter = vec![0u32; block * n];
    for a0 in (0..n).step_by(block) {
        let a1 = (a0 + block).min(n);
        counter.iter_mut().for_each(|c| *c = 0);
        for q in (0..n).filter(|&q| !excluded[q]) {
            let row = g.row(q);
            for (x, &a) in row.iter().enumerate() {
                let a = a as usize;
                if a < a0 || a >= a1 {
                    continue;
                }
                let base = (a - a0) * n;
                for &b in &row[x + 1..] {
                    let c = &mut counter[base + b as usize];
                    *c += 1;
                    best = best.max(*c);
                }
            }
        }
    }
    Ok(best)
}

/// Completion counts for one value of `r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioRow {
    pub r: u32,
    pub count_v: u64,
    pub count_v_prime: u64,
    pub p_k: u32,
    pub p_l: u32,
    /// `count_v·(p_ℓ − r) = count_v′·(p_k − r)`.
    pub ok: bool,
    /// `count_v·(p_k − r) = count_v′·(p_ℓ − r)`.
    pub exchanged_ok: bool,
}

/// Bins the completions of `prefix_rows + [v]` and `prefix_rows + [v′]` by
/// `r = |supp col_k ∩ supp col_ℓ ∩ [m]ᶜ|` and compares the two counts.
/// `p_j` is the column sum still open below the prefix.
pub fn switching_ratio_check(
    deg: &DegreeSequencePair,
    prefix_rows: &[Vec<u32>],
    v: &[u32],
    v_prime: &[u32],
    k: usize,
    l: usize,
    guard: EnumerationGuard,
) -> Result<Vec<RatioRow>, PstatsError> {
    let n = deg.n();
    if k >= n || l >= n || k == l {
        return Err(PstatsError::BadPair(format!("need distinct k, ℓ < {n}, got {k}, {l}")));
    }
    let as_set = |row: &[u32]| -> Vec<bool> {
        let mut s = vec![false; n];
        row.iter().filter(|&&j| (j as usize) < n).for_each(|&j| s[j as usize] = true);
        s
    };
    let (sv, sw) = (as_set(v), as_set(v_prime));
    let valid = sv[k]
        && !sv[l]
        && sw[l]
        && !sw[k]
        && (0..n).filter(|&j| j != k && j != l).all(|j| sv[j] == sw[j]);
    if !valid {
        return Err(PstatsError::BadPair("v, v′ must differ exactly at k, ℓ with v_k = v′_ℓ = 1".into()));
    }
    let m = prefix_rows.len();
    if m >= n {
        return Err(PstatsError::BadPair(format!("prefix of {m} rows leaves no row for v (n = {n})")));
    }
    let open = |j: usize| deg.d_in()[j] as i64 - prefix_rows.iter().filter(|r| r.contains(&(j as u32))).count() as i64;
    let (p_k, p_l) = (open(k), open(l));
    let bins = |row: &[u32]| -> Result<BTreeMap<u32, u64>, PstatsError> {
        let mut rows = prefix_rows.to_vec();
        let mut next = row.to_vec();
        next.sort_unstable();
        rows.push(next);
        let mut out = BTreeMap::new();
        for g in enumerate_completions(deg, &rows, guard)? {
            let r = (m..n).filter(|&i| g.has_edge(i, k) && g.has_edge(i, l)).count() as u32;
            *out.entry(r).or_insert(0) += 1;
        }
        Ok(out)
    };
    let a = bins(v)?;
    let b = bins(v_prime)?;
    let rs: std::collections::BTreeSet<u32> = a.keys().chain(b.keys()).copied().collect();
    Ok(rs
        .into_iter()
        .map(|r| {
            let cv = *a.get(&r).unwrap_or(&0);
            let cw = *b.get(&r).unwrap_or(&0);
            let ri = r as i64;
            let (cvi, cwi) = (cv as i64, cw as i64);
            RatioRow {
                r,
                count_v: cv,
                count_v_prime: cw,
                p_k: p_k.max(0) as u32,
                p_l: p_l.max(0) as u32,
                ok: cvi * (p_l - ri) == cwi * (p_k - ri),
                exchanged_ok: cvi * (p_k - ri) == cwi * (p_l - ri),
            }
        })
        .collect())
}

/// One `(prefix, v, v′, k, ℓ)` configuration with its rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioConfig {
    pub prefix: Vec<Vec<u32>>,
    pub v: Vec<u32>,
    pub v_prime: Vec<u32>,
    pub k: usize,
    pub l: usize,
    pub rows: Vec<RatioRow>,
}

/// Every valid configuration for `deg`: prefixes and next rows are taken
/// from the realizations of `deg`, and `(k, ℓ)` ranges over all pairs with
/// `v_k = 1, v_ℓ = 0`.
pub fn all_ratio_configurations(deg: &DegreeSequencePair, guard: EnumerationGuard) -> Result<Vec<RatioConfig>, PstatsError> {
    let n = deg.n();
    let all = enumerate_completions(deg, &[], guard)?;
    let mut seen = std::collections::BTreeSet::new();
    for g in &all {
        for m in 0..n {
            let prefix: Vec<Vec<u32>> = (0..m).map(|i| g.row(i).to_vec()).collect();
            seen.insert((prefix, g.row(m).to_vec()));
        }
    }
    let mut out = Vec::new();
    for (prefix, v) in seen {
        for k in v.iter().map(|&j| j as usize) {
            for l in (0..n).filter(|l| !v.contains(&(*l as u32))) {
                let mut w: Vec<u32> = v.iter().copied().filter(|&j| j as usize != k).collect();
                w.push(l as u32);
                w.sort_unstable();
                let rows = switching_ratio_check(deg, &prefix, &v, &w, k, l, guard)?;
                out.push(RatioConfig { prefix: prefix.clone(), v: v.clone(), v_prime: w, k, l, rows });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::psi_norm;
    use crate::sampler::{sample_digraph, ChainConfig};
    use proptest::prelude::*;

    fn direct_dispersion(p: &[u32]) -> Vec<f64> {
        p.iter()
            .map(|&a| p.iter().map(|&b| (a as f64 - b as f64).abs()).sum())
            .collect()
    }

    #[test]
    fn p_count_examples() {
        let id = Digraph01::identity(3);
        assert_eq!(p_counts(&id, &[], Side::Col).unwrap(), vec![1, 1, 1]);
        assert_eq!(p_counts(&id, &[0, 1, 2], Side::Col).unwrap(), vec![0, 0, 0]);
        assert_eq!(p_counts(&id, &[0], Side::Col).unwrap(), vec![0, 1, 1]);
        let g = Digraph01::from_edges(3, [(0, 1), (0, 2), (1, 2), (2, 0)]).unwrap();
        assert_eq!(p_counts(&g, &[2], Side::Row).unwrap(), vec![1, 0, 1]);
        assert_eq!(p_counts(&g, &[0], Side::Col).unwrap(), vec![1, 0, 1]);
        assert!(p_counts(&g, &[3], Side::Row).is_err());
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion(&[4, 4, 4]), vec![0.0; 3]);
        assert_eq!(dispersion(&[0, 1]), vec![1.0, 1.0]);
        assert_eq!(dispersion(&[1, 2, 4]), vec![4.0, 3.0, 5.0]);
        assert_eq!(dispersion(&[]), Vec::<f64>::new());
    }

    proptest! {
        #[test]
        fn dispersion_matches_direct(p in prop::collection::vec(0u32..5000, 1..2000)) {
            prop_assert_eq!(dispersion(&p), direct_dispersion(&p));
        }
    }

    fn sampled(n: usize, d: u32, seed: u64) -> Digraph01 {
        let deg = DegreeSequencePair::regular(n, d).unwrap();
        sample_digraph(&deg, ChainConfig::default_for(deg.total(), seed)).unwrap()
    }

    #[test]
    fn sliding_counts_match_recomputation() {
        let g = sampled(40, 7, 3);
        let mut visits = 0;
        scan_intervals(&g, 0.2, 3, |pt| {
            let set: Vec<usize> = (pt.start..pt.start + pt.len).collect();
            assert_eq!(pt.p_col, p_counts(&g, &set, Side::Col).unwrap().as_slice());
            assert_eq!(pt.p_row, p_counts(&g, &set, Side::Row).unwrap().as_slice());
            let direct = psi_norm(&dispersion(pt.p_col)).unwrap();
            assert!((pt.psi_col - direct).abs() <= 1e-11 * direct.max(1.0));
            visits += 1;
        })
        .unwrap();
        // starts 0,3,..,39 with lengths 0..=8 clipped at n
        let expected: usize = (0..40).step_by(3).map(|s| 9.min(40 - s + 1)).sum();
        assert_eq!(visits, expected);
    }

    #[test]
    fn ep_examples() {
        assert_eq!(ep_statistic(&Digraph01::all_ones(5), 0.5, 1).unwrap(), 0.0);
        assert_eq!(ep_statistic(&sampled(30, 5, 1), 0.01, 1).unwrap(), 0.0);
        let id = Digraph01::identity(4);
        let expect = psi_norm(&[3.0, 1.0, 1.0, 1.0]).unwrap() / 4.0;
        let got = ep_statistic(&id, 0.25, 1).unwrap();
        assert!((got - expect).abs() < 1e-12, "{got} {expect}");
        assert!(ep_statistic(&id, 0.0, 1).is_err());
        assert!(ep_statistic(&id, 0.5, 0).is_err());
    }

    #[test]
    fn ep_scan_reports_argmax_and_count() {
        let g = sampled(50, 6, 9);
        let scan = ep_scan(&g, 0.1, 1).unwrap();
        assert_eq!(scan.intervals, (0..50).map(|s| 6.min(50 - s + 1)).sum::<usize>());
        let set: Vec<usize> = (scan.start..scan.start + scan.len).collect();
        let col = psi_norm(&dispersion(&p_counts(&g, &set, Side::Col).unwrap())).unwrap();
        let row = psi_norm(&dispersion(&p_counts(&g, &set, Side::Row).unwrap())).unwrap();
        let expect = col.max(row) / (50.0 * 6f64.sqrt());
        assert!((scan.statistic - expect).abs() < 1e-12);
    }

    #[test]
    fn strong_count_bound_under_small_dispersion() {
        // whenever ‖P^col(I)‖_ψ ≤ c·n·d/ln n, every p_j stays in [(1 − 2c₀)d_j, d_j]
        let c = 0.001;
        for seed in 0..4 {
            let g = sampled(200, 40, seed);
            let n = g.n() as f64;
            let d_in = g.in_degrees();
            let mut checked = 0;
            scan_intervals(&g, 0.05, 1, |pt| {
                if pt.psi_col <= c * n * 40.0 / n.ln() {
                    checked += 1;
                    for (p, &dj) in pt.p_col.iter().zip(&d_in) {
                        assert!(*p <= dj);
                        assert!(*p as f64 >= (1.0 - 2.0 * C0) * dj as f64);
                    }
                }
            })
            .unwrap();
            assert!(checked > 0);
        }
    }

    #[test]
    fn gamma_examples() {
        let gd = gamma_delta(&[100, 100], 100, 0, 1, 0.01).unwrap();
        let base = 1.0 / (1.0 - (-1f64).exp());
        assert!((gd.gamma_kl - base).abs() < 1e-15 && (gd.gamma_lk - base).abs() < 1e-15);
        let gd = gamma_delta(&[100, 95], 100, 0, 1, 0.01).unwrap();
        assert!((gd.gamma_kl - 0.95 * base).abs() < 1e-15);
        let glk = (1.0 + 5.0 / 5.0) * base;
        assert!((gd.gamma_lk - glk).abs() < 1e-14);
        let dev = [0.95 * base, glk].iter().flat_map(|g| [(1.0 - g).abs(), (1.0 - 1.0 / g).abs()]).fold(0.0, f64::max);
        assert_eq!(gd.delta_kl, dev);
        assert_eq!(gd.c_codegree, 0.01);
        assert!(matches!(gamma_delta(&[90, 95], 100, 0, 1, 0.01), Err(PstatsError::Denominator { .. })));
        assert!(gamma_delta(&[100, 95], 100, 0, 1, 0.0).is_err());
    }

    #[test]
    fn delta_small_on_admissible_corpus() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(12);
        for _ in 0..2000 {
            let d: u32 = rng.random_range(500..2000);
            let lo = ((1.0 - 2.0 * C0) * (1.0 - C0) * d as f64).ceil() as u32;
            let p = [rng.random_range(lo..=d), rng.random_range(lo..=d)];
            let gd = gamma_delta(&p, d, 0, 1, DEFAULT_C_CODEGREE).unwrap();
            assert_eq!(gd.easy_bound_holds, Some(true));
            assert!(gd.delta_kl <= 0.25, "{p:?} {d} {}", gd.delta_kl);
        }
    }

    #[test]
    fn easy_bound_needs_small_exponential_term() {
        // e^{-cd} > 3/4: equal counts give δ = e^{-cd}/(1 − e^{-cd}) > 4e^{-cd}
        let gd = gamma_delta(&[20, 20], 20, 0, 1, 0.01).unwrap();
        assert_eq!(gd.easy_bound_holds, Some(false));
        let gd = gamma_delta(&[200, 200], 200, 0, 1, 0.01).unwrap();
        assert_eq!(gd.easy_bound_holds, Some(true));
    }

    fn brute_codegree(g: &Digraph01, set: &[usize]) -> u32 {
        let n = g.n();
        let mut best = 0;
        for a in 0..n {
            for b in a + 1..n {
                let c = (0..n).filter(|q| !set.contains(q) && g.has_edge(*q, a) && g.has_edge(*q, b)).count();
                best = best.max(c as u32);
            }
        }
        best
    }

    #[test]
    fn codegree_examples() {
        assert_eq!(codegree_max(&Digraph01::all_ones(5), &[]).unwrap(), 5);
        assert_eq!(codegree_max(&Digraph01::identity(5), &[]).unwrap(), 0);
        let g = Digraph01::from_edges(4, [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (0, 3)]).unwrap();
        assert_eq!(codegree_max(&g, &[]).unwrap(), 1);
        let s = sampled(30, 9, 4);
        for set in [vec![], vec![1, 2, 3], (10..20).collect()] {
            let want = brute_codegree(&s, &set);
            assert_eq!(codegree_max(&s, &set).unwrap(), want);
            assert_eq!(codegree_max_with_cap(&s, &set, 4 * 30 * 2).unwrap(), want);
        }
    }

    #[test]
    fn ratio_examples() {
        let g = EnumerationGuard::default();
        let deg = DegreeSequencePair::regular(2, 1).unwrap();
        let rows = switching_ratio_check(&deg, &[], &[0], &[1], 0, 1, g).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].r, rows[0].count_v, rows[0].count_v_prime), (0, 1, 1));
        assert!(rows[0].ok && rows[0].exchanged_ok);
        assert!(switching_ratio_check(&deg, &[], &[0], &[0], 0, 1, g).is_err());
    }

    #[test]
    fn ratio_identity_on_small_regular_cases() {
        let g = EnumerationGuard::default();
        for (n, d) in [(3, 1), (3, 2), (4, 1), (4, 2), (4, 3)] {
            let deg = DegreeSequencePair::regular(n, d).unwrap();
            let configs = all_ratio_configurations(&deg, g).unwrap();
            assert!(!configs.is_empty());
            assert!(configs.iter().all(|c| c.rows.iter().all(|r| r.ok)), "n={n} d={d}");
        }
    }

    #[test]
    fn exchanged_identity_fails_on_irregular_margins() {
        let deg = DegreeSequencePair::new(vec![2, 1, 2], vec![2, 2, 1]).unwrap();
        let configs = all_ratio_configurations(&deg, EnumerationGuard::default()).unwrap();
        let empty: Vec<_> = configs.iter().filter(|c| c.prefix.is_empty()).collect();
        let rows: Vec<&RatioRow> = empty.iter().flat_map(|c| &c.rows).collect();
        assert_eq!(rows.len(), 10);
        assert_eq!(rows.iter().filter(|r| r.ok).count(), 10);
        assert_eq!(rows.iter().filter(|r| r.exchanged_ok).count(), 2);
    }
}
