//! Singular values and extreme eigenvalues.
//!
//! Small matrices go through dense Jacobi solvers. Experiment-scale graphs use
//! a matrix-free Lanczos iteration with full reorthogonalization and explicit
//! restarts; every operator is applied through the row/column supports, so a
//! matvec costs `O(nd)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Digraph01, URegGraph};
use crate::matrix::{axpy, dot, norm2, scale};
use crate::rng::{mix_seed, rng_from_seed};
use crate::DenseMatrix;

/// Largest dimension accepted by the dense solvers.
pub const DENSE_CAP: usize = 512;
const JACOBI_SWEEPS: usize = 80;
const KRYLOV_DIM: usize = 160;
/// Relative gap above which the deflated and shifted `s₂` estimates disagree.
pub const AGREEMENT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("dense solver limited to n ≤ {cap}, got {n}")]
    CapExceeded { n: usize, cap: usize },
    #[error("matrix must be square, got {0}×{1}")]
    NotSquare(usize, usize),
    #[error("empty graph")]
    Empty,
    #[error("dimension mismatch: graph has n = {n}, vectors have {x} and {y}")]
    Dimension { n: usize, x: usize, y: usize },
    #[error("need n ≥ 2, got {0}")]
    TooSmall(usize),
}

/// Iteration controls for the matrix-free solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    /// Stop when the Ritz residual is at most `tol · θ`.
    pub tol: f64,
    /// Independent random starts; the largest estimate wins.
    pub restarts: u32,
    /// Matvec budget per start.
    pub max_iter: u64,
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { tol: 1e-8, restarts: 3, max_iter: 10_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub s1: f64,
    pub s2: f64,
    /// `max(|λ₂|, |λₙ|)`, undirected graphs only.
    pub lambda_extreme: Option<f64>,
    pub iterations: u64,
    pub converged: bool,
    /// `|⟨v₁, 𝟙/√n⟩|` for the top right singular vector.
    pub top_overlap: f64,
    /// `s₂` from the deflated operator.
    pub s2_deflated: f64,
    /// `‖M − (d/n)𝟙𝟙ᵗ‖`, exactly regular digraphs only.
    pub s2_shifted: Option<f64>,
    /// The two `s₂` estimates differ by more than [`AGREEMENT_TOL`].
    pub disagreement: bool,
}

/// Singular values in descending order (one-sided Jacobi).
pub fn dense_singular_values(q: &DenseMatrix) -> Result<Vec<f64>, SpectralError> {
    let (m, n) = (q.rows(), q.cols());
    if m.max(n) > DENSE_CAP {
        return Err(SpectralError::CapExceeded { n: m.max(n), cap: DENSE_CAP });
    }
    // columns of Q stored contiguously
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| q[(i, j)]).collect()).collect();
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for r in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[r], &cols[r]);
                let gamma = dot(&cols[p], &cols[r]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(r);
                for (a, b) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = c * x - s * y;
                    *b = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Eigenvalues of a symmetric matrix in descending order (cyclic Jacobi).
pub fn dense_symmetric_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>, SpectralError> {
    let n = a.rows();
    if n != a.cols() {
        return Err(SpectralError::NotSquare(n, a.cols()));
    }
    if n > DENSE_CAP {
        return Err(SpectralError::CapExceeded { n, cap: DENSE_CAP });
    }
    let mut m = a.clone();
    for _ in 0..JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        let diag: f64 = (0..n).map(|i| m[(i, i)] * m[(i, i)]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

/// Top eigenpair estimate of a symmetric operator.
#[derive(Debug, Clone)]
struct Ritz {
    value: f64,
    vector: Vec<f64>,
    matvecs: u64,
    converged: bool,
}

/// Number of eigenvalues of the tridiagonal `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for k in 0..alpha.len() {
        let b2 = if k == 0 { 0.0 } else { beta[k - 1] * beta[k - 1] };
        q = alpha[k] - x - if k == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (alpha[k].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by bisection.
fn tridiagonal_max(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) < k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves a tridiagonal system with partial pivoting (sub `a`, diag `b`, super `c`).
fn tridiagonal_solve(a: &[f64], b: &[f64], c: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = b.len();
    // rows hold up to three nonzeros after pivoting: diag, super, super-super
    let mut d = b.to_vec();
    let mut du: Vec<f64> = c.to_vec();
    du.push(0.0);
    let mut du2 = vec![0.0; n];
    let mut dl: Vec<f64> = a.to_vec();
    let mut x = rhs.to_vec();
    let tiny = f64::MIN_POSITIVE.sqrt();
    for i in 0..n.saturating_sub(1) {
        if dl[i].abs() > d[i].abs() {
            // swap rows i and i+1
            let (di, dui, du2i) = (d[i], du[i], du2[i]);
            d[i] = dl[i];
            du[i] = d[i + 1];
            du2[i] = du[i + 1];
            let f = di / d[i];
            d[i + 1] = dui - f * du[i];
            du[i + 1] = du2i - f * du2[i];
            x.swap(i, i + 1);
            x[i + 1] -= f * x[i];
            dl[i] = f;
        } else {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            x[i + 1] -= f * x[i];
            dl[i] = f;
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    for i in (0..n).rev() {
        let mut v = x[i];
        if i + 1 < n {
            v -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= du2[i] * x[i + 2];
        }
        x[i] = v / d[i];
    }
    x
}

/// Unit eigenvector of the tridiagonal for eigenvalue `theta` (inverse iteration).
fn tridiagonal_eigvec(alpha: &[f64], beta: &[f64], theta: f64) -> Vec<f64> {
    let k = alpha.len();
    if k == 1 {
        return vec![1.0];
    }
    let scale_ = alpha.iter().chain(beta).fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let shift = theta + 1e-13 * scale_;
    let diag: Vec<f64> = alpha.iter().map(|a| a - shift).collect();
    let mut v = vec![1.0 / (k as f64).sqrt(); k];
    for _ in 0..3 {
        v = tridiagonal_solve(beta, &diag, beta, &v);
        let nv = norm2(&v);
        scale(1.0 / nv, &mut v);
    }
    v
}

fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let nv = norm2(&v);
    scale(1.0 / nv, &mut v);
    v
}

/// Largest eigenpair of a symmetric positive semidefinite operator.
fn lanczos_top(
    n: usize,
    apply: &mut dyn FnMut(&[f64], &mut [f64]),
    mut start: Vec<f64>,
    tol: f64,
    budget: u64,
) -> Ritz {
    let mut matvecs = 0u64;
    let mut best = Ritz { value: 0.0, vector: start.clone(), matvecs: 0, converged: false };
    let kmax = KRYLOV_DIM.min(n);
    loop {
        let ns = norm2(&start);
        if ns == 0.0 || !ns.is_finite() {
            best.converged = true;
            best.matvecs = matvecs;
            return best;
        }
        scale(1.0 / ns, &mut start);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            // full reorthogonalization, twice
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    axpy(-c, q, &mut w);
                }
            }
            let b = norm2(&w);
            let theta = tridiagonal_max(&alpha, &beta);
            let s = tridiagonal_eigvec(&alpha, &beta, theta);
            let residual = b * s[s.len() - 1].abs();
            let tiny = b <= 1e-14 * theta.abs().max(alpha.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            let done = residual <= tol * theta.abs() || tiny;
            let exhausted = basis.len() == kmax || matvecs >= budget;
            if done || exhausted {
                let mut y = vec![0.0; n];
                for (q, &c) in basis.iter().zip(&s) {
                    axpy(c, q, &mut y);
                }
                let ny = norm2(&y);
                scale(1.0 / ny, &mut y);
                best = Ritz { value: theta, vector: y, matvecs, converged: done };
                break;
            }
            beta.push(b);
            let mut next = w.clone();
            scale(1.0 / b, &mut next);
            basis.push(next);
        }
        if best.converged || matvecs >= budget {
            best.matvecs = matvecs;
            return best;
        }
        start = best.vector.clone();
    }
}

fn apply_m(g: &Digraph01, x: &[f64], y: &mut [f64]) {
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = g.row(i).iter().map(|&j| x[j as usize]).sum();
    }
}

fn apply_mt(g: &Digraph01, x: &[f64], y: &mut [f64]) {
    for (j, yj) in y.iter_mut().enumerate() {
        *yj = g.col(j).iter().map(|&i| x[i as usize]).sum();
    }
}

fn project_out(v: &mut [f64], u: &[f64]) {
    let c = dot(v, u);
    axpy(-c, u, v);
}

fn project_ones(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Best of several random starts: the largest eigenvalue estimate.
fn top_with_restarts(
    n: usize,
    apply: &mut dyn FnMut(&[f64], &mut [f64]),
    prepare: &dyn Fn(&mut [f64]),
    opts: &SpectralOptions,
    stream: u64,
) -> Ritz {
    let mut best: Option<Ritz> = None;
    let mut total = 0;
    let mut all_converged = true;
    for r in 0..opts.restarts.max(1) {
        let mut rng = rng_from_seed(mix_seed(mix_seed(opts.seed, stream), r as u64));
        let mut start = random_unit(&mut rng, n);
        prepare(&mut start);
        let ritz = lanczos_top(n, apply, start, opts.tol, opts.max_iter);
        total += ritz.matvecs;
        all_converged &= ritz.converged;
        if best.as_ref().is_none_or(|b| ritz.value > b.value) {
            best = Some(ritz);
        }
    }
    let mut best = best.expect("at least one start");
    best.matvecs = total;
    best.converged = all_converged;
    best
}

/// Top singular value, top right singular vector overlap with `𝟙/√n`, and
/// `s₂` of a 0-1 matrix.
pub fn s2_digraph(g: &Digraph01, opts: &SpectralOptions) -> Result<SpectralSummary, SpectralError> {
    let n = g.n();
    if n == 0 || g.edge_count() == 0 {
        return Err(SpectralError::Empty);
    }
    let mut tmp = vec![0.0; n];
    let mut gram = |x: &[f64], y: &mut [f64]| {
        apply_m(g, x, &mut tmp);
        apply_mt(g, &tmp, y);
    };
    let top = top_with_restarts(n, &mut gram, &|_| {}, opts, 1);
    let v1 = top.vector.clone();
    let s1 = top.value.max(0.0).sqrt();
    let top_overlap = v1.iter().sum::<f64>().abs() / (n as f64).sqrt();

    let mut deflated = |x: &[f64], y: &mut [f64]| {
        let mut px = x.to_vec();
        project_out(&mut px, &v1);
        gram(&px, y);
        project_out(y, &v1);
    };
    let second = top_with_restarts(n, &mut deflated, &|v| project_out(v, &v1), opts, 2);
    let s2_deflated = second.value.max(0.0).sqrt();
    let mut iterations = top.matvecs + second.matvecs;
    let mut converged = top.converged && second.converged;

    let mut s2_shifted = None;
    if let Some(d) = g.regular_degree() {
        let c = d as f64 / n as f64;
        let mut shifted = |x: &[f64], y: &mut [f64]| {
            let sx: f64 = x.iter().sum();
            apply_m(g, x, &mut tmp);
            tmp.iter_mut().for_each(|v| *v -= c * sx);
            let st: f64 = tmp.iter().sum();
            apply_mt(g, &tmp, y);
            y.iter_mut().for_each(|v| *v -= c * st);
        };
        let sh = top_with_restarts(n, &mut shifted, &|_| {}, opts, 3);
        iterations += sh.matvecs;
        converged &= sh.converged;
        s2_shifted = Some(sh.value.max(0.0).sqrt());
    }
    let s2 = s2_shifted.map_or(s2_deflated, |s| s.max(s2_deflated)).min(s1);
    let disagreement = s2_shifted.is_some_and(|s| (s - s2_deflated).abs() > AGREEMENT_TOL * s.max(s2_deflated).max(1e-300));
    Ok(SpectralSummary {
        s1,
        s2,
        lambda_extreme: None,
        iterations,
        converged,
        top_overlap,
        s2_deflated,
        s2_shifted,
        disagreement,
    })
}

/// `max(|λ₂|, |λₙ|)` of a `d`-regular graph, computed as `‖A − (d/n)𝟙𝟙ᵗ‖`.
pub fn lambda_extreme(g: &URegGraph, opts: &SpectralOptions) -> Result<SpectralSummary, SpectralError> {
    let n = g.n();
    if n == 0 {
        return Err(SpectralError::Empty);
    }
    let c = g.d() as f64 / n as f64;
    let a = g.as_digraph();
    let mut tmp = vec![0.0; n];
    let centered = |x: &[f64], y: &mut [f64]| {
        apply_m(&a, x, y);
        let s: f64 = x.iter().sum();
        y.iter_mut().for_each(|v| *v -= c * s);
    };
    let mut square = |x: &[f64], y: &mut [f64]| {
        let mut t = std::mem::take(&mut tmp);
        centered(x, &mut t);
        centered(&t, y);
        tmp = t;
    };
    let top = top_with_restarts(n, &mut square, &project_ones, opts, 4);
    let lambda = top.value.max(0.0).sqrt();
    Ok(SpectralSummary {
        s1: g.d() as f64,
        s2: lambda,
        lambda_extreme: Some(lambda),
        iterations: top.matvecs,
        converged: top.converged,
        top_overlap: 1.0,
        s2_deflated: lambda,
        s2_shifted: Some(lambda),
        disagreement: false,
    })
}

/// `Σ_{M_ij = 1} xᵢ y_j`.
pub fn bilinear_form(g: &Digraph01, x: &[f64], y: &[f64]) -> Result<f64, SpectralError> {
    let n = g.n();
    if x.len() != n || y.len() != n {
        return Err(SpectralError::Dimension { n, x: x.len(), y: y.len() });
    }
    Ok((0..n)
        .map(|i| x[i] * g.row(i).iter().map(|&j| y[j as usize]).sum::<f64>())
        .sum())
}

/// `x` uniform on the unit sphere, `y` a random unit vector with zero sum.
pub fn sample_unit_pair<R: Rng>(n: usize, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    if n < 2 {
        return Err(SpectralError::TooSmall(n));
    }
    let x = random_unit(rng, n);
    let mut y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    project_ones(&mut y);
    let ny = norm2(&y);
    scale(1.0 / ny, &mut y);
    project_ones(&mut y);
    let ny = norm2(&y);
    scale(1.0 / ny, &mut y);
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DegreeSequencePair;
    use crate::sampler::{sample_digraph, sample_undirected, ChainConfig};
    use approx::assert_relative_eq;

    fn na(m: &DenseMatrix) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
    }

    #[test]
    fn dense_svd_examples() {
        let j3 = DenseMatrix::from_fn(3, 3, |_, _| 1.0);
        let s = dense_singular_values(&j3).unwrap();
        assert_relative_eq!(s[0], 3.0, epsilon = 1e-12);
        assert!(s[1].abs() < 1e-12 && s[2].abs() < 1e-12);
        let s = dense_singular_values(&DenseMatrix::identity(3)).unwrap();
        assert!(s.iter().all(|v| (v - 1.0).abs() < 1e-15));
        let d = DenseMatrix::from_row_major(2, 2, vec![3.0, 0.0, 0.0, -4.0]);
        assert_eq!(dense_singular_values(&d).unwrap(), vec![4.0, 3.0]);
        assert!(dense_singular_values(&DenseMatrix::zeros(513, 513)).is_err());
    }

    #[test]
    fn dense_svd_matches_nalgebra() {
        let mut rng = rng_from_seed(4);
        for n in [1, 2, 5, 17, 40] {
            let q = DenseMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
            let ours = dense_singular_values(&q).unwrap();
            let mut theirs: Vec<f64> = na(&q).singular_values().iter().copied().collect();
            theirs.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in ours.iter().zip(&theirs) {
                assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-12);
            }
            let ss: f64 = ours.iter().map(|s| s * s).sum();
            assert_relative_eq!(ss, q.hs_norm_sq(), max_relative = 1e-8);
        }
    }

    #[test]
    fn dense_eig_matches_nalgebra() {
        let mut rng = rng_from_seed(5);
        for n in [1, 3, 16, 33] {
            let b = DenseMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
            let a = DenseMatrix::from_fn(n, n, |i, j| b[(i, j)] + b[(j, i)]);
            let ours = dense_symmetric_eigenvalues(&a).unwrap();
            let mut theirs: Vec<f64> = na(&a).symmetric_eigenvalues().iter().copied().collect();
            theirs.sort_by(|a, b| b.total_cmp(a));
            for (x, y) in ours.iter().zip(&theirs) {
                assert!((x - y).abs() < 1e-10 * (1.0 + y.abs()), "{x} {y}");
            }
        }
    }

    #[test]
    fn tridiagonal_helpers() {
        let alpha = [2.0, 2.0, 2.0];
        let beta = [-1.0, -1.0];
        let top = tridiagonal_max(&alpha, &beta);
        assert_relative_eq!(top, 2.0 + 2f64.sqrt(), epsilon = 1e-13);
        let v = tridiagonal_eigvec(&alpha, &beta, top);
        let expect = [0.5, -std::f64::consts::FRAC_1_SQRT_2, 0.5];
        let sign = v[0].signum();
        for (a, b) in v.iter().zip(expect) {
            assert!((a * sign - b).abs() < 1e-10);
        }
        let x = tridiagonal_solve(&[1.0, 1.0], &[1e-20, 1.0, 3.0], &[2.0, 1.0], &[1.0, 2.0, 3.0]);
        // residual check
        let r0 = 1e-20 * x[0] + 2.0 * x[1] - 1.0;
        let r1 = x[0] + x[1] + x[2] - 2.0;
        let r2 = x[1] + 3.0 * x[2] - 3.0;
        assert!(r0.abs() < 1e-12 && r1.abs() < 1e-12 && r2.abs() < 1e-12);
    }

    #[test]
    fn s2_examples() {
        let opts = SpectralOptions::default();
        let j = s2_digraph(&Digraph01::all_ones(3), &opts).unwrap();
        assert_relative_eq!(j.s1, 3.0, epsilon = 1e-10);
        assert!(j.s2 < 1e-6);
        let perm = Digraph01::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let p = s2_digraph(&perm, &opts).unwrap();
        assert_relative_eq!(p.s1, 1.0, epsilon = 1e-10);
        assert_relative_eq!(p.s2, 1.0, epsilon = 1e-10);
        assert!(s2_digraph(&Digraph01::from_rows(vec![vec![]]).unwrap(), &opts).is_err());
    }

    #[test]
    fn s2_matches_dense_on_random_instances() {
        let opts = SpectralOptions::default();
        for (t, (n, d)) in [(32, 3), (32, 8), (20, 10), (45, 7)].into_iter().enumerate() {
            let deg = DegreeSequencePair::regular(n, d).unwrap();
            let g = sample_digraph(&deg, ChainConfig::default_for(deg.total(), t as u64)).unwrap();
            let dense = dense_singular_values(&g.to_dense()).unwrap();
            let s = s2_digraph(&g, &opts).unwrap();
            assert!(s.converged);
            assert_relative_eq!(s.s1, dense[0], max_relative = 1e-8);
            assert_relative_eq!(s.s2, dense[1], max_relative = 1e-6);
            assert!(!s.disagreement);
            assert!(s.top_overlap >= 1.0 - 1e-8);
        }
    }

    #[test]
    fn s2_on_irregular_margins() {
        let deg = DegreeSequencePair::new(vec![3, 1, 2, 4, 2, 0], vec![2, 2, 2, 2, 2, 2]).unwrap();
        let g = sample_digraph(&deg, ChainConfig::default_for(deg.total(), 1)).unwrap();
        let dense = dense_singular_values(&g.to_dense()).unwrap();
        let s = s2_digraph(&g, &SpectralOptions::default()).unwrap();
        assert!(s.s2_shifted.is_none());
        assert_relative_eq!(s.s1, dense[0], max_relative = 1e-8);
        assert_relative_eq!(s.s2, dense[1], max_relative = 1e-6);
    }

    #[test]
    fn lambda_extreme_examples() {
        let opts = SpectralOptions::default();
        let k4 = lambda_extreme(&URegGraph::complete(4), &opts).unwrap();
        assert_relative_eq!(k4.lambda_extreme.unwrap(), 1.0, epsilon = 1e-8);
        let c4 = lambda_extreme(&URegGraph::cycle(4), &opts).unwrap();
        assert_relative_eq!(c4.lambda_extreme.unwrap(), 2.0, epsilon = 1e-8);
        let cfg = ChainConfig::default_for(48, 2);
        let g = sample_undirected(16, 3, cfg).unwrap();
        let ev = dense_symmetric_eigenvalues(&g.to_dense()).unwrap();
        let expect = ev[1].abs().max(ev[15].abs());
        let got = lambda_extreme(&g, &opts).unwrap().lambda_extreme.unwrap();
        assert_relative_eq!(got, expect, max_relative = 1e-6);
        assert!(got <= 3.0 + 1e-9);
    }

    #[test]
    fn bilinear_examples() {
        let deg = DegreeSequencePair::regular(9, 4).unwrap();
        let g = sample_digraph(&deg, ChainConfig::default_for(36, 3)).unwrap();
        let u = vec![1.0 / 3.0; 9];
        assert_relative_eq!(bilinear_form(&g, &u, &u).unwrap(), 4.0, epsilon = 1e-12);
        assert_eq!(bilinear_form(&g, &u, &[0.0; 9]).unwrap(), 0.0);
        let mut rng = rng_from_seed(1);
        let (x, y) = sample_unit_pair(9, &mut rng).unwrap();
        let dense = g.to_dense().matvec(&y);
        assert_relative_eq!(bilinear_form(&g, &x, &y).unwrap(), dot(&x, &dense), epsilon = 1e-12);
        assert!(bilinear_form(&g, &x, &y[..3]).is_err());
    }

    #[test]
    fn unit_pair_properties() {
        let mut rng = rng_from_seed(2);
        let (_, y) = sample_unit_pair(2, &mut rng).unwrap();
        assert_relative_eq!(y[0].abs(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_relative_eq!(y[0], -y[1], epsilon = 1e-12);
        let mut mean = vec![0.0; 5];
        for _ in 0..10_000 {
            let (x, y) = sample_unit_pair(5, &mut rng).unwrap();
            assert!((norm2(&x) - 1.0).abs() <= 1e-12 && (norm2(&y) - 1.0).abs() <= 1e-12);
            assert!(y.iter().sum::<f64>().abs() <= 1e-10);
            axpy(1e-4, &y, &mut mean);
        }
        assert!(mean.iter().all(|m| m.abs() < 0.03));
        assert!(sample_unit_pair(1, &mut rng).is_err());
    }
}
