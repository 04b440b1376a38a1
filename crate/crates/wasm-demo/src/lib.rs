//! Browser bindings: a sampled spectrum, tail-bound curves and the two Orlicz norms.
//!
//! Every export returns a JSON string; the `*_json` functions hold the logic so
//! they can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use specgap::norms::{log_norm, psi_norm};
use specgap::sampler::{sample_digraph, sample_undirected, ChainConfig};
use specgap::spectral::{lambda_extreme, s2_digraph, SpectralOptions};
use specgap::tailbounds::{bennett_tail, bernstein_tail, MartingaleParams};
use specgap::DegreeSequencePair;

/// Largest `n` the page will sample.
pub const MAX_N: usize = 2048;

#[derive(Serialize)]
struct SpectrumView {
    n: usize,
    d: u32,
    directed: bool,
    s1: f64,
    s2: f64,
    ratio_sqrt_d: f64,
    ratio_centered: f64,
    converged: bool,
}

#[derive(Serialize)]
struct TailView {
    t: Vec<f64>,
    bennett: Vec<f64>,
    bernstein: Vec<f64>,
}

#[derive(Serialize)]
struct NormView {
    n: usize,
    psi: f64,
    log: f64,
    l1: f64,
    linf: f64,
}

fn to_json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn spectrum_json(n: usize, d: u32, directed: bool, seed: u64) -> Result<String, String> {
    if n > MAX_N {
        return Err(format!("n is limited to {MAX_N} in the browser"));
    }
    let opts = SpectralOptions { seed, ..SpectralOptions::default() };
    let edges = n as u64 * d as u64;
    let s = if directed {
        let deg = DegreeSequencePair::regular(n, d).map_err(|e| e.to_string())?;
        let g = sample_digraph(&deg, ChainConfig::default_for(edges, seed)).map_err(|e| e.to_string())?;
        s2_digraph(&g, &opts).map_err(|e| e.to_string())?
    } else {
        let g = sample_undirected(n, d as usize, ChainConfig::default_for(edges / 2, seed)).map_err(|e| e.to_string())?;
        lambda_extreme(&g, &opts).map_err(|e| e.to_string())?
    };
    let df = d as f64;
    to_json(&SpectrumView {
        n,
        d,
        directed,
        s1: s.s1,
        s2: s.s2,
        ratio_sqrt_d: s.s2 / df.sqrt(),
        ratio_centered: s.s2 / (df * (1.0 - df / n as f64)).sqrt(),
        converged: s.converged,
    })
}

pub fn tail_curves_json(m: f64, sigma2: f64, t_max: f64, points: usize) -> Result<String, String> {
    let p = MartingaleParams::new(m, sigma2).map_err(|e| e.to_string())?;
    if t_max.is_nan() || t_max <= 0.0 || points < 2 {
        return Err("need t_max > 0 and at least two points".into());
    }
    let t: Vec<f64> = (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect();
    let bennett = t.iter().map(|&x| bennett_tail(x, p)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let bernstein = t.iter().map(|&x| bernstein_tail(x, p)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    to_json(&TailView { t, bennett, bernstein })
}

/// Norms of a comma or whitespace separated list of numbers.
pub fn orlicz_norms_json(values: &str) -> Result<String, String> {
    let x: Vec<f64> = values
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("`{s}` is not a number")))
        .collect::<Result<_, _>>()?;
    let psi = psi_norm(&x).map_err(|e| e.to_string())?;
    let log = log_norm(&x).map_err(|e| e.to_string())?;
    to_json(&NormView {
        n: x.len(),
        psi,
        log,
        l1: x.iter().map(|v| v.abs()).sum(),
        linf: x.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
    })
}

#[wasm_bindgen]
pub fn spectrum_demo(n: usize, d: u32, directed: bool, seed: u32) -> Result<String, JsValue> {
    spectrum_json(n, d, directed, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn tail_curves(m: f64, sigma2: f64, t_max: f64, points: usize) -> Result<String, JsValue> {
    tail_curves_json(m, sigma2, t_max, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn orlicz_norms(values: &str) -> Result<String, JsValue> {
    orlicz_norms_json(values).map_err(|e| JsValue::from_str(&e))
}
