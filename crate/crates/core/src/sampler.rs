//! Exact enumeration of fixed-margin 0-1 matrices and switch-chain samplers.
//!
//! The digraph chain proposes a uniform ordered pair of 1-entries and
//! rejects invalid switches, which makes it symmetric with the uniform law
//! as stationary distribution. Internally a chain keeps an edge list plus an
//! `n × n` bitset so every attempt costs O(1).

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::graph::{gale_ryser_feasible, DegreeSequencePair, Digraph01, GraphError, URegGraph};
use crate::rng::{rng_from_seed, SimRng};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("degree sequences are not realizable by a 0-1 matrix")]
    Infeasible,
    #[error("enumeration refused: n = {n}, {edges} ones, search space up to {estimate:.3e} row choices (limits n ≤ {max_n}, ones ≤ {max_edges})")]
    GuardExceeded {
        n: usize,
        edges: u64,
        estimate: f64,
        max_n: usize,
        max_edges: u64,
    },
    #[error("n·d must be even and d < n (got n = {n}, d = {d})")]
    Parity { n: usize, d: usize },
    #[error("pairing model is limited to d ≤ 4 (got {0})")]
    PairingDegree(usize),
    #[error("pairing model gave no simple graph after {0} attempts")]
    PairingExhausted(u32),
    #[error("invalid fixed rows: {0}")]
    BadPrefix(String),
    #[error("chi-square test needs at least two cells and a positive total")]
    EmptyCounts,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Burn-in, spacing and seed of a switch chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub burn_in_switches: u64,
    pub spacing_switches: u64,
    pub seed: u64,
}

impl ChainConfig {
    /// Burn-in `20·E·ln(E+1)` and spacing `2E` for a chain over `E` ones.
    pub fn default_for(edges: u64, seed: u64) -> Self {
        let e = edges as f64;
        Self {
            burn_in_switches: (20.0 * e * (e + 1.0).ln()).ceil() as u64,
            spacing_switches: (2 * edges).max(1),
            seed,
        }
    }
}

/// Size limits for exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationGuard {
    pub max_n: usize,
    pub max_edges: u64,
}

impl Default for EnumerationGuard {
    fn default() -> Self {
        Self { max_n: 6, max_edges: 18 }
    }
}

impl EnumerationGuard {
    fn check(&self, deg: &DegreeSequencePair) -> Result<(), SamplerError> {
        let n = deg.n();
        let edges = deg.total();
        if n <= self.max_n && edges <= self.max_edges {
            return Ok(());
        }
        let estimate = deg
            .d_out()
            .iter()
            .map(|&r| binomial(n as u64, r as u64))
            .product();
        Err(SamplerError::GuardExceeded {
            n,
            edges,
            estimate,
            max_n: self.max_n,
            max_edges: self.max_edges,
        })
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All 0-1 matrices with row sums `d_out` and column sums `d_in`, in
/// lexicographic row-by-row order.
pub fn enumerate_all(deg: &DegreeSequencePair) -> Result<Vec<Digraph01>, SamplerError> {
    enumerate_completions(deg, &[], EnumerationGuard::default())
}

/// All matrices whose first rows equal `fixed_rows` (sorted column lists).
/// Fixed rows that overflow a column capacity give an empty result.
pub fn enumerate_completions(
    deg: &DegreeSequencePair,
    fixed_rows: &[Vec<u32>],
    guard: EnumerationGuard,
) -> Result<Vec<Digraph01>, SamplerError> {
    guard.check(deg)?;
    let n = deg.n();
    if fixed_rows.len() > n {
        return Err(SamplerError::BadPrefix(format!("{} rows for n = {n}", fixed_rows.len())));
    }
    let mut remaining: Vec<i64> = deg.d_in().iter().map(|&v| v as i64).collect();
    for (i, row) in fixed_rows.iter().enumerate() {
        if row.len() != deg.d_out()[i] as usize {
            return Err(SamplerError::BadPrefix(format!(
                "row {i} has {} ones, expected {}",
                row.len(),
                deg.d_out()[i]
            )));
        }
        if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&j| j as usize >= n) {
            return Err(SamplerError::BadPrefix(format!("row {i} must be sorted, distinct, in range")));
        }
        for &j in row {
            remaining[j as usize] -= 1;
        }
    }
    if remaining.iter().any(|&r| r < 0) {
        return Ok(Vec::new());
    }
    let mut state = Backtrack {
        n,
        d_out: deg.d_out(),
        remaining,
        rows: fixed_rows.to_vec(),
        out: Vec::new(),
    };
    state.rows.resize(n, Vec::new());
    state.row(fixed_rows.len());
    Ok(state.out)
}

struct Backtrack<'a> {
    n: usize,
    d_out: &'a [u32],
    remaining: Vec<i64>,
    rows: Vec<Vec<u32>>,
    out: Vec<Digraph01>,
}

impl Backtrack<'_> {
    fn row(&mut self, i: usize) {
        if i == self.n {
            if self.remaining.iter().all(|&r| r == 0) {
                let g = Digraph01::from_rows(self.rows.clone()).expect("backtracking yields valid rows");
                self.out.push(g);
            }
            return;
        }
        self.rows[i].clear();
        self.choose(i, 0, self.d_out[i] as usize);
    }

    fn choose(&mut self, i: usize, from: usize, left: usize) {
        if left == 0 {
            // every column must still fit in the rows below
            let rows_below = (self.n - i - 1) as i64;
            if self.remaining.iter().all(|&r| r <= rows_below) {
                let saved = self.rows[i].clone();
                self.row(i + 1);
                self.rows[i] = saved;
            }
            return;
        }
        for j in from..self.n {
            if self.n - j < left {
                break;
            }
            if self.remaining[j] == 0 {
                continue;
            }
            self.remaining[j] -= 1;
            self.rows[i].push(j as u32);
            self.choose(i, j + 1, left - 1);
            self.rows[i].pop();
            self.remaining[j] += 1;
        }
    }
}

/// One switch attempt on `g`: two uniform 1-entries `(i,j), (k,l)` are
/// replaced by `(i,l), (k,j)` when that keeps a 0-1 matrix.
pub fn switch_step<R: Rng + ?Sized>(g: &mut Digraph01, rng: &mut R) -> bool {
    let e = g.edge_count();
    if e < 2 {
        return false;
    }
    let (i, j) = nth_edge(g, rng.random_range(0..e));
    let (k, l) = nth_edge(g, rng.random_range(0..e));
    if i == k || j == l || g.has_edge(i, l) || g.has_edge(k, j) {
        return false;
    }
    g.apply_switch_unchecked(i, j, k, l);
    true
}

fn nth_edge(g: &Digraph01, mut idx: usize) -> (usize, usize) {
    for i in 0..g.n() {
        let r = g.row(i);
        if idx < r.len() {
            return (i, r[idx] as usize);
        }
        idx -= r.len();
    }
    unreachable!("edge index in range")
}

/// Dense `n × n` bit matrix.
#[derive(Debug, Clone)]
struct BitMatrix {
    n: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        Self { n, words: vec![0; (n * n).div_ceil(64)] }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> bool {
        let b = i * self.n + j;
        self.words[b >> 6] >> (b & 63) & 1 == 1
    }

    #[inline]
    fn flip(&mut self, i: usize, j: usize) {
        let b = i * self.n + j;
        self.words[b >> 6] ^= 1 << (b & 63);
    }
}

/// Switch chain over fixed-margin 0-1 matrices.
#[derive(Debug, Clone)]
pub struct SwitchChain {
    edges: Vec<(u32, u32)>,
    bits: BitMatrix,
    rng: SimRng,
    attempts: u64,
    accepted: u64,
}

impl SwitchChain {
    pub fn new(start: &Digraph01, seed: u64) -> Self {
        let mut bits = BitMatrix::new(start.n());
        let edges: Vec<(u32, u32)> = start
            .edges()
            .map(|(i, j)| {
                bits.flip(i, j);
                (i as u32, j as u32)
            })
            .collect();
        Self { edges, bits, rng: rng_from_seed(seed), attempts: 0, accepted: 0 }
    }

    #[inline]
    pub fn attempt(&mut self) -> bool {
        self.attempts += 1;
        let e = self.edges.len();
        if e < 2 {
            return false;
        }
        let a = self.rng.random_range(0..e);
        let b = self.rng.random_range(0..e);
        let (i, j) = self.edges[a];
        let (k, l) = self.edges[b];
        let (iu, ju, ku, lu) = (i as usize, j as usize, k as usize, l as usize);
        if i == k || j == l || self.bits.get(iu, lu) || self.bits.get(ku, ju) {
            return false;
        }
        self.bits.flip(iu, ju);
        self.bits.flip(ku, lu);
        self.bits.flip(iu, lu);
        self.bits.flip(ku, ju);
        self.edges[a] = (i, l);
        self.edges[b] = (k, j);
        self.accepted += 1;
        true
    }

    pub fn run(&mut self, attempts: u64) {
        for _ in 0..attempts {
            self.attempt();
        }
    }

    /// Fraction of attempts that switched.
    pub fn acceptance_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempts as f64
        }
    }

    pub fn state(&self) -> Digraph01 {
        Digraph01::from_edges(
            self.bits.n,
            self.edges.iter().map(|&(i, j)| (i as usize, j as usize)),
        )
        .expect("chain keeps a 0-1 matrix")
    }
}

/// Deterministic start: each row takes the columns with the largest
/// remaining sums (ties to the lower index).
pub fn greedy_start(deg: &DegreeSequencePair) -> Result<Digraph01, SamplerError> {
    if !gale_ryser_feasible(deg) {
        return Err(SamplerError::Infeasible);
    }
    let n = deg.n();
    let mut remaining: Vec<u32> = deg.d_in().to_vec();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rows = Vec::with_capacity(n);
    for &r in deg.d_out() {
        order.sort_by(|&a, &b| remaining[b].cmp(&remaining[a]).then(a.cmp(&b)));
        let chosen: Vec<u32> = order[..r as usize].iter().map(|&j| j as u32).collect();
        for &j in &chosen {
            if remaining[j as usize] == 0 {
                return Err(SamplerError::Infeasible);
            }
            remaining[j as usize] -= 1;
        }
        rows.push(chosen);
    }
    Ok(Digraph01::from_rows(rows)?)
}

/// Stream of chain samples: the first after burn-in, then one every spacing.
#[derive(Debug, Clone)]
pub struct DigraphSampler {
    chain: SwitchChain,
    cfg: ChainConfig,
    started: bool,
}

impl DigraphSampler {
    pub fn new(deg: &DegreeSequencePair, cfg: ChainConfig) -> Result<Self, SamplerError> {
        let start = greedy_start(deg)?;
        Ok(Self { chain: SwitchChain::new(&start, cfg.seed), cfg, started: false })
    }

    pub fn chain(&self) -> &SwitchChain {
        &self.chain
    }
}

impl Iterator for DigraphSampler {
    type Item = Digraph01;

    fn next(&mut self) -> Option<Digraph01> {
        let steps = if self.started { self.cfg.spacing_switches.max(1) } else { self.cfg.burn_in_switches };
        self.started = true;
        self.chain.run(steps);
        Some(self.chain.state())
    }
}

/// One approximately uniform element of `M_n(d_in, d_out)`.
pub fn sample_digraph(deg: &DegreeSequencePair, cfg: ChainConfig) -> Result<Digraph01, SamplerError> {
    let mut s = DigraphSampler::new(deg, cfg)?;
    Ok(s.next().expect("sampler stream is infinite"))
}

/// Switch chain over simple undirected graphs with fixed degrees.
#[derive(Debug, Clone)]
pub struct UndirectedChain {
    d: usize,
    edges: Vec<(u32, u32)>,
    bits: BitMatrix,
    rng: SimRng,
}

impl UndirectedChain {
    pub fn new(start: &URegGraph, seed: u64) -> Self {
        let mut bits = BitMatrix::new(start.n());
        let edges = start
            .edges()
            .map(|(a, b)| {
                bits.flip(a, b);
                bits.flip(b, a);
                (a as u32, b as u32)
            })
            .collect();
        Self { d: start.d(), edges, bits, rng: rng_from_seed(seed) }
    }

    /// Picks two edges `{a,b}, {c,e}` and an orientation; replaces them by
    /// `{a,c}, {b,e}` (or `{a,e}, {b,c}`) when the result stays simple.
    #[inline]
    pub fn attempt(&mut self) -> bool {
        let m = self.edges.len();
        if m < 2 {
            return false;
        }
        let x = self.rng.random_range(0..m);
        let y = self.rng.random_range(0..m);
        let flip: bool = self.rng.random();
        let (a, b) = self.edges[x];
        let (c, e) = if flip { (self.edges[y].1, self.edges[y].0) } else { self.edges[y] };
        if a == c || a == e || b == c || b == e {
            return false;
        }
        let (au, bu, cu, eu) = (a as usize, b as usize, c as usize, e as usize);
        if self.bits.get(au, cu) || self.bits.get(bu, eu) {
            return false;
        }
        for (p, q) in [(au, bu), (cu, eu), (au, cu), (bu, eu)] {
            self.bits.flip(p, q);
            self.bits.flip(q, p);
        }
        self.edges[x] = (a, c);
        self.edges[y] = (b, e);
        true
    }

    pub fn run(&mut self, attempts: u64) {
        for _ in 0..attempts {
            self.attempt();
        }
    }

    pub fn state(&self) -> URegGraph {
        URegGraph::from_edges(
            self.bits.n,
            self.d,
            self.edges.iter().map(|&(a, b)| (a as usize, b as usize)),
        )
        .expect("chain keeps a simple regular graph")
    }
}

fn check_parity(n: usize, d: usize) -> Result<(), SamplerError> {
    if (n * d) % 2 == 1 || (d >= n && !(n == 0 && d == 0)) {
        return Err(SamplerError::Parity { n, d });
    }
    Ok(())
}

/// Circulant start: `i ~ i±1, …, i±⌊d/2⌋ (mod n)` plus `i ~ i+n/2` for odd `d`.
pub fn circulant_start(n: usize, d: usize) -> Result<URegGraph, SamplerError> {
    check_parity(n, d)?;
    let mut edges = Vec::with_capacity(n * d / 2);
    for i in 0..n {
        for s in 1..=d / 2 {
            edges.push((i, (i + s) % n));
        }
        if d % 2 == 1 && i < n / 2 {
            edges.push((i, i + n / 2));
        }
    }
    Ok(URegGraph::from_edges(n, d, edges)?)
}

/// Stream of undirected chain samples.
#[derive(Debug, Clone)]
pub struct UndirectedSampler {
    chain: UndirectedChain,
    cfg: ChainConfig,
    started: bool,
}

impl UndirectedSampler {
    pub fn new(n: usize, d: usize, cfg: ChainConfig) -> Result<Self, SamplerError> {
        let start = circulant_start(n, d)?;
        Ok(Self { chain: UndirectedChain::new(&start, cfg.seed), cfg, started: false })
    }
}

impl Iterator for UndirectedSampler {
    type Item = URegGraph;

    fn next(&mut self) -> Option<URegGraph> {
        let steps = if self.started { self.cfg.spacing_switches.max(1) } else { self.cfg.burn_in_switches };
        self.started = true;
        self.chain.run(steps);
        Some(self.chain.state())
    }
}

/// One approximately uniform simple `d`-regular graph on `n` vertices.
pub fn sample_undirected(n: usize, d: usize, cfg: ChainConfig) -> Result<URegGraph, SamplerError> {
    let mut s = UndirectedSampler::new(n, d, cfg)?;
    Ok(s.next().expect("sampler stream is infinite"))
}

/// Pairing model with rejection of loops and multi-edges (exactly uniform,
/// practical only for small `d`).
pub fn sample_undirected_pairing(n: usize, d: usize, seed: u64) -> Result<URegGraph, SamplerError> {
    const MAX_ATTEMPTS: u32 = 100_000;
    check_parity(n, d)?;
    if d > 4 {
        return Err(SamplerError::PairingDegree(d));
    }
    let mut rng = rng_from_seed(seed);
    let mut points: Vec<usize> = (0..n * d).map(|p| p / d.max(1)).collect();
    'attempt: for _ in 0..MAX_ATTEMPTS {
        rand::seq::SliceRandom::shuffle(points.as_mut_slice(), &mut rng);
        let mut adj: Vec<Vec<u32>> = vec![Vec::with_capacity(d); n];
        for pair in points.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b || adj[a].contains(&(b as u32)) {
                continue 'attempt;
            }
            adj[a].push(b as u32);
            adj[b].push(a as u32);
        }
        return Ok(URegGraph::from_adjacency(d, adj)?);
    }
    Err(SamplerError::PairingExhausted(MAX_ATTEMPTS))
}

/// Pearson statistic against the uniform law and its chi-square p-value.
pub fn chi_square_uniformity(counts: &[u64]) -> Result<(f64, f64), SamplerError> {
    let k = counts.len();
    let total: u64 = counts.iter().sum();
    if k < 2 || total == 0 {
        return Err(SamplerError::EmptyCounts);
    }
    let expected = total as f64 / k as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let dist = ChiSquared::new((k - 1) as f64).expect("positive degrees of freedom");
    Ok((stat, dist.sf(stat)))
}
