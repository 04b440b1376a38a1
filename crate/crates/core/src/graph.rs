//! Graph and 0-1 matrix types, degree-sequence checks and the text formats.
//!
//! A directed graph on `[n]` is stored as its adjacency matrix `M` with
//! synchronized sorted row and column supports. Loops are allowed. Undirected
//! graphs are simple (no loops, no multi-edges) and regular.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::DenseMatrix;

/// Slack in the degree condition `(1 − c₀)d ≤ dᵢ ≤ d`, `d ≤ (1/2 + c₀)n`.
pub const C0: f64 = 0.001;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("in/out degree vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("degree sums differ: Σ d_in = {sum_in}, Σ d_out = {sum_out}")]
    SumMismatch { sum_in: u64, sum_out: u64 },
    #[error("degree {degree} at index {index} exceeds n = {n}")]
    DegreeTooLarge { index: usize, degree: u32, n: usize },
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("loop at vertex {0} is not allowed in a simple undirected graph")]
    Loop(usize),
    #[error("vertex {vertex} has degree {degree}, expected {d}")]
    NotRegular { vertex: usize, degree: usize, d: usize },
    #[error("interval [{start}, {start}+{len}) does not fit in [0, {n})")]
    BadInterval { start: usize, len: usize, n: usize },
    #[error("length mismatch: {0}")]
    Dimension(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Prescribed column sums `d_in` and row sums `d_out`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DegreeSequencePair {
    d_in: Vec<u32>,
    d_out: Vec<u32>,
}

impl DegreeSequencePair {
    pub fn new(d_in: Vec<u32>, d_out: Vec<u32>) -> Result<Self, GraphError> {
        if d_in.len() != d_out.len() {
            return Err(GraphError::LengthMismatch(d_in.len(), d_out.len()));
        }
        let n = d_in.len();
        for (index, &degree) in d_in.iter().chain(&d_out).enumerate() {
            if degree as usize > n {
                return Err(GraphError::DegreeTooLarge {
                    index: index % n.max(1),
                    degree,
                    n,
                });
            }
        }
        let sum_in: u64 = d_in.iter().map(|&v| v as u64).sum();
        let sum_out: u64 = d_out.iter().map(|&v| v as u64).sum();
        if sum_in != sum_out {
            return Err(GraphError::SumMismatch { sum_in, sum_out });
        }
        Ok(Self { d_in, d_out })
    }

    /// All in- and out-degrees equal to `d`.
    pub fn regular(n: usize, d: u32) -> Result<Self, GraphError> {
        Self::new(vec![d; n], vec![d; n])
    }

    pub fn n(&self) -> usize {
        self.d_in.len()
    }

    pub fn d_in(&self) -> &[u32] {
        &self.d_in
    }

    pub fn d_out(&self) -> &[u32] {
        &self.d_out
    }

    /// Number of ones `Σ d_out`.
    pub fn total(&self) -> u64 {
        self.d_out.iter().map(|&v| v as u64).sum()
    }

    /// `Some(d)` when every in- and out-degree equals `d`.
    pub fn regular_degree(&self) -> Option<u32> {
        let first = *self.d_out.first()?;
        self.d_in
            .iter()
            .chain(&self.d_out)
            .all(|&v| v == first)
            .then_some(first)
    }

    /// Largest in- or out-degree.
    pub fn max_degree(&self) -> u32 {
        self.d_in.iter().chain(&self.d_out).copied().max().unwrap_or(0)
    }
}

/// `(1 − c₀)d ≤ d_in[i], d_out[i] ≤ d` for all `i` and `d ≤ (1/2 + c₀)n`.
pub fn degree_condition_check(deg: &DegreeSequencePair, d: u32) -> bool {
    let df = d as f64;
    let lower = (1.0 - C0) * df;
    let fits = |v: &u32| (*v as f64) >= lower && *v <= d;
    d >= 1
        && df <= (0.5 + C0) * deg.n() as f64
        && deg.d_in.iter().all(fits)
        && deg.d_out.iter().all(fits)
}

/// Whether some 0-1 matrix has row sums `d_out` and column sums `d_in`
/// (Gale–Ryser dominance on the sorted sequences).
pub fn gale_ryser_feasible(deg: &DegreeSequencePair) -> bool {
    let n = deg.n();
    let mut rows: Vec<u64> = deg.d_out.iter().map(|&v| v as u64).collect();
    rows.sort_unstable_by(|a, b| b.cmp(a));
    let cols: Vec<u64> = deg.d_in.iter().map(|&v| v as u64).collect();
    let mut row_prefix = 0u64;
    for k in 1..=n {
        row_prefix += rows[k - 1];
        let cap: u64 = cols.iter().map(|&c| c.min(k as u64)).sum();
        if row_prefix > cap {
            return false;
        }
    }
    rows.iter().sum::<u64>() == cols.iter().sum::<u64>()
}

/// Directed graph on `[n]` (loops allowed) as a 0-1 matrix with
/// synchronized row and column supports.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Digraph01 {
    n: usize,
    rows: Vec<Vec<u32>>,
    cols: Vec<Vec<u32>>,
}

impl Digraph01 {
    /// Builds from 0-based `(row, col)` pairs.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut rows = vec![Vec::new(); n];
        for (i, j) in edges {
            for v in [i, j] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
            }
            rows[i].push(j as u32);
        }
        Self::from_rows(rows)
    }

    /// Builds from per-row column lists (any order, no duplicates).
    pub fn from_rows(mut rows: Vec<Vec<u32>>) -> Result<Self, GraphError> {
        let n = rows.len();
        let mut cols = vec![Vec::new(); n];
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            for w in row.windows(2) {
                if w[0] == w[1] {
                    return Err(GraphError::DuplicateEdge(i, w[0] as usize));
                }
            }
            for &j in row.iter() {
                if j as usize >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: j as usize, n });
                }
                cols[j as usize].push(i as u32);
            }
        }
        Ok(Self { n, rows, cols })
    }

    pub fn from_dense(m: &[Vec<u8>]) -> Result<Self, GraphError> {
        let n = m.len();
        let mut rows = Vec::with_capacity(n);
        for (i, r) in m.iter().enumerate() {
            if r.len() != n {
                return Err(GraphError::Dimension(format!("row {i} has length {}, expected {n}", r.len())));
            }
            rows.push(r.iter().enumerate().filter(|(_, v)| **v != 0).map(|(j, _)| j as u32).collect());
        }
        Self::from_rows(rows)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows((0..n as u32).map(|i| vec![i]).collect()).expect("identity is valid")
    }

    pub fn all_ones(n: usize) -> Self {
        Self::from_rows(vec![(0..n as u32).collect(); n]).expect("all-ones is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted support of row `i` (out-neighbours of `i`).
    pub fn row(&self, i: usize) -> &[u32] {
        &self.rows[i]
    }

    /// Sorted support of column `j` (in-neighbours of `j`).
    pub fn col(&self, j: usize) -> &[u32] {
        &self.cols[j]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&(j as u32)).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&j| (i, j as usize)))
    }

    pub fn out_degrees(&self) -> Vec<u32> {
        self.rows.iter().map(|r| r.len() as u32).collect()
    }

    pub fn in_degrees(&self) -> Vec<u32> {
        self.cols.iter().map(|c| c.len() as u32).collect()
    }

    pub fn degrees(&self) -> DegreeSequencePair {
        DegreeSequencePair {
            d_in: self.in_degrees(),
            d_out: self.out_degrees(),
        }
    }

    /// `Some(d)` if every row and column has exactly `d` ones.
    pub fn regular_degree(&self) -> Option<u32> {
        self.degrees().regular_degree()
    }

    pub fn transpose(&self) -> Self {
        Self {
            n: self.n,
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for (i, j) in self.edges() {
            m[(i, j)] = 1.0;
        }
        m
    }

    /// Checks sortedness and the row/column mirror invariant.
    pub fn validate(&self) -> Result<(), GraphError> {
        let mut count = vec![0usize; self.n];
        for (i, r) in self.rows.iter().enumerate() {
            for w in r.windows(2) {
                if w[0] >= w[1] {
                    return Err(GraphError::DuplicateEdge(i, w[1] as usize));
                }
            }
            for &j in r {
                if self.cols[j as usize].binary_search(&(i as u32)).is_err() {
                    return Err(GraphError::Dimension(format!("({i},{j}) missing from column support")));
                }
                count[j as usize] += 1;
            }
        }
        for (j, c) in self.cols.iter().enumerate() {
            if c.len() != count[j] || c.windows(2).any(|w| w[0] >= w[1]) {
                return Err(GraphError::Dimension(format!("column {j} support out of sync")));
            }
        }
        Ok(())
    }

    /// Replaces ones at `(i, j), (k, l)` by `(i, l), (k, j)`. The caller
    /// guarantees the switch is valid.
    pub(crate) fn apply_switch_unchecked(&mut self, i: usize, j: usize, k: usize, l: usize) {
        remove_sorted(&mut self.rows[i], j as u32);
        insert_sorted(&mut self.rows[i], l as u32);
        remove_sorted(&mut self.rows[k], l as u32);
        insert_sorted(&mut self.rows[k], j as u32);
        remove_sorted(&mut self.cols[j], i as u32);
        insert_sorted(&mut self.cols[j], k as u32);
        remove_sorted(&mut self.cols[l], k as u32);
        insert_sorted(&mut self.cols[l], i as u32);
    }
}

fn remove_sorted(v: &mut Vec<u32>, x: u32) {
    let pos = v.binary_search(&x).expect("element present");
    v.remove(pos);
}

fn insert_sorted(v: &mut Vec<u32>, x: u32) {
    let pos = v.binary_search(&x).expect_err("element absent");
    v.insert(pos, x);
}

/// Simple undirected `d`-regular graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct URegGraph {
    n: usize,
    d: usize,
    adj: Vec<Vec<u32>>,
}

impl URegGraph {
    /// Builds from 0-based undirected edges; every vertex must end with degree `d`.
    pub fn from_edges<I>(n: usize, d: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(GraphError::Loop(a));
            }
            adj[a].push(b as u32);
            adj[b].push(a as u32);
        }
        Self::from_adjacency(d, adj)
    }

    pub fn from_adjacency(d: usize, mut adj: Vec<Vec<u32>>) -> Result<Self, GraphError> {
        let n = adj.len();
        for (v, nb) in adj.iter_mut().enumerate() {
            nb.sort_unstable();
            if nb.windows(2).any(|w| w[0] == w[1]) {
                let dup = nb.windows(2).find(|w| w[0] == w[1]).unwrap()[0];
                return Err(GraphError::DuplicateEdge(v.min(dup as usize), v.max(dup as usize)));
            }
            if nb.binary_search(&(v as u32)).is_ok() {
                return Err(GraphError::Loop(v));
            }
            if nb.len() != d {
                return Err(GraphError::NotRegular { vertex: v, degree: nb.len(), d });
            }
        }
        let g = Self { n, d, adj };
        for (v, nb) in g.adj.iter().enumerate() {
            for &w in nb {
                if !g.has_edge(w as usize, v) {
                    return Err(GraphError::Dimension(format!("asymmetric adjacency at ({v},{w})")));
                }
            }
        }
        Ok(g)
    }

    /// Cycle `0 – 1 – … – (n−1) – 0`.
    pub fn cycle(n: usize) -> Self {
        Self::from_edges(n, 2, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle with n ≥ 3")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::from_edges(n, n - 1, edges).expect("complete graph")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&(b as u32)).is_ok()
    }

    /// Each edge once as `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(a, nb)| {
            nb.iter()
                .filter(move |&&b| (b as usize) > a)
                .map(move |&b| (a, b as usize))
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for (a, nb) in self.adj.iter().enumerate() {
            for &b in nb {
                m[(a, b as usize)] = 1.0;
            }
        }
        m
    }

    /// The adjacency matrix viewed as a symmetric 0-1 matrix.
    pub fn as_digraph(&self) -> Digraph01 {
        Digraph01::from_rows(self.adj.clone()).expect("valid adjacency")
    }
}

/// Contiguous index range `[start, start + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub len: usize,
}

impl Interval {
    pub fn new(start: usize, len: usize, n: usize) -> Result<Self, GraphError> {
        if start + len > n {
            return Err(GraphError::BadInterval { start, len, n });
        }
        Ok(Self { start, len })
    }

    pub fn empty() -> Self {
        Self { start: 0, len: 0 }
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Top-right `⌊n/2⌋ × ⌊n/2⌋` block: rows `0..h`, columns `n−h..n`.
pub fn corner_submatrix(g: &URegGraph) -> Digraph01 {
    let h = g.n / 2;
    let offset = g.n - h;
    let rows = (0..h)
        .map(|i| {
            g.adj[i]
                .iter()
                .filter(|&&j| j as usize >= offset)
                .map(|&j| j - offset as u32)
                .collect()
        })
        .collect();
    Digraph01::from_rows(rows).expect("corner of a simple graph is a 0-1 matrix")
}

/// Membership of `(u, v)` in the degree set: `‖u‖₁ = ‖v‖₁` and, for both
/// vectors, at most `ℓ e^{−k²}` entries deviate from `d` by more than `kδ`,
/// for every `k ≥ 1`.
///
/// With `k* = min{k : ℓe^{−k²} < 1}` the conditions for `k ≥ k*` reduce to
/// "no deviation exceeds `k*δ`", so only `k < k*` is checked count-wise.
pub fn deg_membership(u: &[u32], v: &[u32], d: f64, delta: f64) -> Result<bool, GraphError> {
    if u.len() != v.len() {
        return Err(GraphError::LengthMismatch(u.len(), v.len()));
    }
    if u.is_empty() {
        return Err(GraphError::Dimension("empty degree vectors".into()));
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(GraphError::Dimension(format!("δ must be positive, got {delta}")));
    }
    let l1 = |w: &[u32]| w.iter().map(|&x| x as u64).sum::<u64>();
    if l1(u) != l1(v) {
        return Ok(false);
    }
    let ell = u.len() as f64;
    let mut kstar = 1u32;
    while ell * (-(kstar as f64).powi(2)).exp() >= 1.0 {
        kstar += 1;
    }
    let ok = |w: &[u32]| {
        let dev: Vec<f64> = w.iter().map(|&x| (x as f64 - d).abs()).collect();
        let counts_ok = (1..kstar).all(|k| {
            let kd = k as f64 * delta;
            dev.iter().filter(|&&x| x > kd).count() as f64 <= ell * (-(k as f64).powi(2)).exp()
        });
        counts_ok && dev.iter().all(|&x| x <= kstar as f64 * delta)
    };
    Ok(ok(u) && ok(v))
}

/// A graph file holds either kind of graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Graph {
    Directed(Digraph01),
    Undirected(URegGraph),
}

impl Graph {
    /// The adjacency matrix as a 0-1 matrix (symmetric for undirected graphs).
    pub fn to_digraph(&self) -> Digraph01 {
        match self {
            Graph::Directed(g) => g.clone(),
            Graph::Undirected(g) => g.as_digraph(),
        }
    }
}

/// Edge-list text: `digraph n` or `ugraph n d`, then `i j` per line (1-based).
pub fn format_graph(g: &Graph) -> String {
    let mut s = String::new();
    match g {
        Graph::Directed(m) => {
            writeln!(s, "digraph {}", m.n()).unwrap();
            for (i, j) in m.edges() {
                writeln!(s, "{} {}", i + 1, j + 1).unwrap();
            }
        }
        Graph::Undirected(u) => {
            writeln!(s, "ugraph {} {}", u.n(), u.d()).unwrap();
            for (a, b) in u.edges() {
                writeln!(s, "{} {}", a + 1, b + 1).unwrap();
            }
        }
    }
    s
}

/// Matrix Market coordinate pattern (`general` for digraphs, `symmetric`
/// lower triangle for undirected graphs).
pub fn format_matrix_market(g: &Graph) -> String {
    let mut s = String::new();
    match g {
        Graph::Directed(m) => {
            writeln!(s, "%%MatrixMarket matrix coordinate pattern general").unwrap();
            writeln!(s, "{} {} {}", m.n(), m.n(), m.edge_count()).unwrap();
            for (i, j) in m.edges() {
                writeln!(s, "{} {}", i + 1, j + 1).unwrap();
            }
        }
        Graph::Undirected(u) => {
            writeln!(s, "%%MatrixMarket matrix coordinate pattern symmetric").unwrap();
            writeln!(s, "{} {} {}", u.n(), u.n(), u.n() * u.d() / 2).unwrap();
            for (a, b) in u.edges() {
                writeln!(s, "{} {}", b + 1, a + 1).unwrap();
            }
        }
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse { line, msg: msg.into() }
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize, GraphError> {
    tok.parse::<usize>()
        .map_err(|_| perr(line, format!("invalid {what} `{tok}`")))
}

fn parse_pair(text: &str, line: usize, n: usize) -> Result<(usize, usize), GraphError> {
    let toks: Vec<&str> = text.split_ascii_whitespace().collect();
    if toks.len() != 2 {
        return Err(perr(line, format!("expected `i j`, got `{text}`")));
    }
    let i = parse_usize(toks[0], line, "vertex")?;
    let j = parse_usize(toks[1], line, "vertex")?;
    if i == 0 || j == 0 || i > n || j > n {
        return Err(perr(line, format!("vertex out of range 1..={n}")));
    }
    Ok((i - 1, j - 1))
}

/// Parses the edge-list format or Matrix Market coordinate pattern.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    if header.starts_with("%%MatrixMarket") {
        return parse_matrix_market(hline, header, lines);
    }
    let toks: Vec<&str> = header.split_ascii_whitespace().collect();
    match toks.as_slice() {
        ["digraph", n] => {
            let n = parse_usize(n, hline, "n")?;
            let mut rows = vec![Vec::new(); n];
            for (line, l) in lines {
                let (i, j) = parse_pair(l, line, n)?;
                if rows[i].contains(&(j as u32)) {
                    return Err(perr(line, format!("duplicate edge {} {}", i + 1, j + 1)));
                }
                rows[i].push(j as u32);
            }
            Ok(Graph::Directed(Digraph01::from_rows(rows)?))
        }
        ["ugraph", n, d] => {
            let n = parse_usize(n, hline, "n")?;
            let d = parse_usize(d, hline, "d")?;
            let adj = read_undirected(n, d, lines, false)?;
            finish_undirected(hline, d, adj)
        }
        _ => Err(perr(hline, "header must be `digraph n` or `ugraph n d`")),
    }
}

fn read_undirected<'a>(
    n: usize,
    d: usize,
    lines: impl Iterator<Item = (usize, &'a str)>,
    allow_reverse_dups: bool,
) -> Result<Vec<Vec<u32>>, GraphError> {
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (line, l) in lines {
        let (a, b) = parse_pair(l, line, n)?;
        if a == b {
            return Err(perr(line, format!("loop at vertex {}", a + 1)));
        }
        if adj[a].contains(&(b as u32)) {
            if allow_reverse_dups {
                continue;
            }
            return Err(perr(line, format!("duplicate edge {} {}", a + 1, b + 1)));
        }
        adj[a].push(b as u32);
        adj[b].push(a as u32);
        if adj[a].len() > d || adj[b].len() > d {
            return Err(perr(line, format!("degree exceeds header d = {d}")));
        }
    }
    Ok(adj)
}

fn finish_undirected(hline: usize, d: usize, adj: Vec<Vec<u32>>) -> Result<Graph, GraphError> {
    if let Some((v, nb)) = adj.iter().enumerate().find(|(_, nb)| nb.len() != d) {
        return Err(perr(
            hline,
            format!("vertex {} has degree {}, header says {d}", v + 1, nb.len()),
        ));
    }
    Ok(Graph::Undirected(URegGraph::from_adjacency(d, adj)?))
}

fn parse_matrix_market<'a>(
    hline: usize,
    header: &str,
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<Graph, GraphError> {
    let h: Vec<String> = header.split_ascii_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if h.len() != 5 || h[1] != "matrix" || h[2] != "coordinate" || h[3] != "pattern" {
        return Err(perr(hline, "only `matrix coordinate pattern` Matrix Market files are supported"));
    }
    let symmetric = match h[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(perr(hline, format!("unsupported symmetry `{other}`"))),
    };
    let mut lines = lines.filter(|(_, l)| !l.starts_with('%'));
    let (sline, size) = lines.next().ok_or_else(|| perr(hline, "missing size line"))?;
    let toks: Vec<&str> = size.split_ascii_whitespace().collect();
    if toks.len() != 3 {
        return Err(perr(sline, "size line must be `rows cols nnz`"));
    }
    let rows = parse_usize(toks[0], sline, "rows")?;
    let cols = parse_usize(toks[1], sline, "cols")?;
    let nnz = parse_usize(toks[2], sline, "nnz")?;
    if rows != cols {
        return Err(perr(sline, "adjacency matrix must be square"));
    }
    let entries: Vec<(usize, &str)> = lines.collect();
    if entries.len() != nnz {
        return Err(perr(sline, format!("header declares {nnz} entries, found {}", entries.len())));
    }
    if symmetric {
        let n = rows;
        let d = if n == 0 {
            0
        } else {
            entries
                .iter()
                .map(|(line, l)| parse_pair(l, *line, n))
                .collect::<Result<Vec<_>, _>>()?
                .iter()
                .filter(|(a, b)| *a == 0 || *b == 0)
                .count()
        };
        let adj = read_undirected(n, d, entries.into_iter(), false)?;
        finish_undirected(sline, d, adj)
    } else {
        let mut out = vec![Vec::new(); rows];
        for (line, l) in entries {
            let (i, j) = parse_pair(l, line, rows)?;
            if out[i].contains(&(j as u32)) {
                return Err(perr(line, format!("duplicate entry {} {}", i + 1, j + 1)));
            }
            out[i].push(j as u32);
        }
        Ok(Graph::Directed(Digraph01::from_rows(out)?))
    }
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
    parse_graph(&std::fs::read_to_string(path)?)
}

pub fn write_graph(g: &Graph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    std::fs::write(path, format_graph(g))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_condition_examples() {
        let n = 10;
        let deg = DegreeSequencePair::regular(n, 5).unwrap();
        assert!(degree_condition_check(&deg, 5));
        let mut d_in = vec![5; n];
        d_in[0] = 6;
        d_in[1] = 4;
        let deg = DegreeSequencePair::new(d_in, vec![5; n]).unwrap();
        assert!(!degree_condition_check(&deg, 5));
        let mut d_in = vec![500u32; 1000];
        d_in[3] = 499;
        d_in[4] = 501;
        let deg = DegreeSequencePair::new(d_in, vec![500; 1000]).unwrap();
        assert!(!degree_condition_check(&deg, 500));
        // d too large relative to n
        let deg = DegreeSequencePair::regular(10, 6).unwrap();
        assert!(!degree_condition_check(&deg, 6));
    }

    fn brute_feasible(deg: &DegreeSequencePair) -> bool {
        let n = deg.n();
        (0u32..1 << (n * n)).any(|mask| {
            let bit = |i: usize, j: usize| (mask >> (i * n + j)) & 1;
            (0..n).all(|i| (0..n).map(|j| bit(i, j)).sum::<u32>() == deg.d_out()[i])
                && (0..n).all(|j| (0..n).map(|i| bit(i, j)).sum::<u32>() == deg.d_in()[j])
        })
    }

    #[test]
    fn gale_ryser_examples() {
        let p = |a: Vec<u32>, b: Vec<u32>| DegreeSequencePair::new(a, b).unwrap();
        assert!(gale_ryser_feasible(&p(vec![1, 1], vec![1, 1])));
        assert!(gale_ryser_feasible(&p(vec![2, 0], vec![1, 1])));
        let bad = p(vec![2, 0], vec![2, 0]);
        assert!(!gale_ryser_feasible(&bad));
        assert!(!brute_feasible(&bad));
    }

    #[test]
    fn gale_ryser_matches_brute_force_n3() {
        let n = 3;
        let vecs: Vec<Vec<u32>> = (0..4u32.pow(n as u32))
            .map(|c| (0..n).map(|k| (c / 4u32.pow(k as u32)) % 4).collect())
            .collect();
        for a in &vecs {
            for b in &vecs {
                if let Ok(deg) = DegreeSequencePair::new(a.clone(), b.clone()) {
                    assert_eq!(gale_ryser_feasible(&deg), brute_feasible(&deg), "{a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn degree_pair_validation() {
        assert!(matches!(DegreeSequencePair::new(vec![1], vec![1, 0]), Err(GraphError::LengthMismatch(..))));
        assert!(matches!(DegreeSequencePair::new(vec![1, 1], vec![2, 1]), Err(GraphError::SumMismatch { .. })));
        assert!(matches!(DegreeSequencePair::new(vec![3, 0], vec![3, 0]), Err(GraphError::DegreeTooLarge { .. })));
    }

    #[test]
    fn corner_examples() {
        let c4 = URegGraph::cycle(4);
        let t = corner_submatrix(&c4);
        assert_eq!(t, Digraph01::from_dense(&[vec![0, 1], vec![1, 0]]).unwrap());
        let k4 = URegGraph::complete(4);
        assert_eq!(corner_submatrix(&k4), Digraph01::all_ones(2));
        let pm = URegGraph::from_edges(4, 1, [(0, 2), (1, 3)]).unwrap();
        assert_eq!(corner_submatrix(&pm), Digraph01::identity(2));
    }

    #[test]
    fn corner_odd_n_uses_last_columns() {
        // n = 5 cycle: rows {0,1}, columns {3,4}
        let c5 = URegGraph::cycle(5);
        let t = corner_submatrix(&c5);
        assert_eq!(t.n(), 2);
        // 0–4 is an edge, 1–3 / 1–4 / 0–3 are not
        assert_eq!(t, Digraph01::from_dense(&[vec![0, 1], vec![0, 0]]).unwrap());
        let top_right = c5.edges().filter(|&(a, b)| a < 2 && b >= 3).count();
        assert_eq!(t.edge_count(), top_right);
    }

    #[test]
    fn deg_membership_examples() {
        assert!(deg_membership(&[5, 5, 5], &[5, 5, 5], 5.0, 1.0).unwrap());
        assert!(deg_membership(&[7, 4, 4], &[5, 5, 5], 5.0, 1.0).unwrap());
        assert!(!deg_membership(&[15, 5, 5], &[10, 10, 5], 5.0, 1.0).unwrap());
        assert!(!deg_membership(&[6, 5, 5], &[5, 5, 5], 5.0, 1.0).unwrap());
        assert!(deg_membership(&[1, 2], &[1], 1.0, 1.0).is_err());
        // half-integral target
        assert!(deg_membership(&[3, 2], &[2, 3], 2.5, 1.0).unwrap());
    }

    #[test]
    fn round_trip_and_errors() {
        let g = Graph::Directed(Digraph01::from_edges(3, [(0, 0), (0, 2), (2, 1)]).unwrap());
        assert_eq!(parse_graph(&format_graph(&g)).unwrap(), g);
        assert_eq!(parse_graph(&format_matrix_market(&g)).unwrap(), g);
        let u = Graph::Undirected(URegGraph::cycle(5));
        assert_eq!(parse_graph(&format_graph(&u)).unwrap(), u);
        assert_eq!(parse_graph(&format_matrix_market(&u)).unwrap(), u);
        assert_eq!(format_graph(&u), "ugraph 5 2\n1 2\n1 5\n2 3\n3 4\n4 5\n");

        let one = parse_graph("digraph 1\n").unwrap();
        assert_eq!(one, Graph::Directed(Digraph01::from_rows(vec![vec![]]).unwrap()));

        let dup = parse_graph("digraph 2\n1 2\n1 2\n");
        assert!(matches!(dup, Err(GraphError::Parse { line: 3, .. })));
        let bad = parse_graph("digraph 2\n1 x\n");
        assert!(matches!(bad, Err(GraphError::Parse { line: 2, .. })));
        let short = parse_graph("ugraph 4 2\n1 2\n2 3\n3 4\n");
        assert!(matches!(short, Err(GraphError::Parse { line: 1, .. })));
        let over = parse_graph("ugraph 4 1\n1 2\n1 3\n");
        assert!(matches!(over, Err(GraphError::Parse { line: 3, .. })));
        assert!(matches!(parse_graph("graph 3\n"), Err(GraphError::Parse { line: 1, .. })));
    }

    #[test]
    fn switch_keeps_mirror() {
        let mut g = Digraph01::identity(3);
        g.apply_switch_unchecked(0, 0, 1, 1);
        g.validate().unwrap();
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
        assert_eq!(g.degrees(), DegreeSequencePair::regular(3, 1).unwrap());
    }
}
