//! Reproducible Monte Carlo experiments.
//!
//! A run is fully determined by its [`ExperimentConfig`]. Trial `t` belongs
//! to chain `t / samples_per_chain` at position `t % samples_per_chain`; the
//! chain seed is `mix_seed(base_seed, chain)`. Chains run on a bounded worker
//! pool (`SGL_THREADS`) and records are merged in trial order, so output never
//! depends on scheduling.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discrepancy::{heavy_certificate, DiscrepancyError};
use crate::graph::{
    corner_submatrix, deg_membership, degree_condition_check, gale_ryser_feasible, DegreeSequencePair, Digraph01,
    GraphError, URegGraph,
};
use crate::norms::{shift_delta, NormError};
use crate::pstats::{
    all_ratio_configurations, codegree_max, default_stride, ep_scan, max_interval_len, PstatsError,
};
use crate::rng::{mix_seed, rng_from_seed, SimRng};
use crate::sampler::{
    chi_square_uniformity, enumerate_all, ChainConfig, DigraphSampler, EnumerationGuard, SamplerError,
    UndirectedSampler,
};
use crate::spectral::{bilinear_form, lambda_extreme, s2_digraph, sample_unit_pair, SpectralError, SpectralOptions};
use crate::tailbounds::{bennett_tail, freedman_mgf_bound, linear_form_tail_bound, MartingaleParams, QStats, TailError};
use crate::DenseMatrix;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "SGL_THREADS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Pstats(#[from] PstatsError),
    #[error(transparent)]
    Discrepancy(#[from] DiscrepancyError),
    #[error(transparent)]
    Tail(#[from] TailError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectral,
    Concentration,
    Freedman,
    Codegree,
    Ep,
    Corner,
    Uniformity,
    RatioIdentity,
    Heavy,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Spectral,
        Experiment::Concentration,
        Experiment::Freedman,
        Experiment::Codegree,
        Experiment::Ep,
        Experiment::Corner,
        Experiment::Uniformity,
        Experiment::RatioIdentity,
        Experiment::Heavy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectral => "spectral",
            Experiment::Concentration => "concentration",
            Experiment::Freedman => "freedman",
            Experiment::Codegree => "codegree",
            Experiment::Ep => "ep",
            Experiment::Corner => "corner",
            Experiment::Uniformity => "uniformity",
            Experiment::RatioIdentity => "ratio-identity",
            Experiment::Heavy => "heavy",
        }
    }

    /// Experiment-specific CSV columns, after the common prefix.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Experiment::Spectral => &[
                "s1",
                "s2",
                "s2_over_sqrt_d",
                "s2_over_sqrt_d_centered",
                "lambda_extreme",
                "top_overlap",
                "converged",
                "disagreement",
                "iterations",
            ],
            Experiment::Concentration => &["z", "z_normalized", "hs_norm", "ep_statistic", "accepted"],
            Experiment::Freedman => &["x_final"],
            Experiment::Codegree => &["interval_start", "interval_len", "codegree_empty", "codegree_interval", "ratio_to_d"],
            Experiment::Ep => &["c0", "stride", "max_len", "statistic", "argmax_start", "argmax_len"],
            Experiment::Corner => &[
                "corner_n",
                "membership",
                "max_dev_in",
                "max_dev_out",
                "s2_corner",
                "s2_corner_ratio",
                "lambda_extreme",
                "lambda_ratio",
            ],
            Experiment::Uniformity => &["cell"],
            Experiment::RatioIdentity => &["config", "r", "count_v", "count_v_prime", "p_k", "p_l", "ok", "exchanged_ok"],
            Experiment::Heavy => &[
                "bilinear",
                "light_sum",
                "heavy_sum",
                "heavy_count",
                "bound",
                "all_pass",
                "implication",
                "decomposition_error",
            ],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| HarnessError::UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Directed,
    Undirected,
}

/// One `(n, d, model)` cell of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    pub n: usize,
    pub d: u32,
    #[serde(default = "default_model")]
    pub model: Model,
}

fn default_model() -> Model {
    Model::Directed
}

/// Matrix generators for the linear-form experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QGenerator {
    RankOne,
    RankOneLight,
    RandomSign,
    Block,
    Zero,
    Ones,
}

/// Step laws for the martingale experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepLaw {
    Rademacher,
    Uniform,
    Zero,
}

impl StepLaw {
    /// Per-step bound `M` and variance `σ²`.
    fn params(self) -> (f64, f64) {
        match self {
            StepLaw::Rademacher => (1.0, 1.0),
            StepLaw::Uniform => (1.0, 1.0 / 3.0),
            StepLaw::Zero => (1.0, 0.0),
        }
    }

    fn draw(self, rng: &mut SimRng) -> f64 {
        match self {
            StepLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            StepLaw::Uniform => rng.random_range(-1.0..1.0),
            StepLaw::Zero => 0.0,
        }
    }
}

/// Named knobs; every field has a default so configs only list what they change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Parameters {
    pub k1: f64,
    pub k2: f64,
    pub gamma: f64,
    pub c0: Vec<f64>,
    pub c_deg: f64,
    /// Filter threshold on the interval statistic (concentration only).
    pub l: Option<f64>,
    pub c_codegree: f64,
    pub burn_in: Option<u64>,
    pub spacing: Option<u64>,
    pub samples_per_chain: u64,
    pub stride: Option<usize>,
    pub q_generator: QGenerator,
    pub step_law: StepLaw,
    pub steps: usize,
    pub t_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub tol: f64,
    pub restarts: u32,
    pub max_iter: u64,
    /// Run cells outside the degree regime instead of rejecting the config.
    pub allow_outside_regime: bool,
    /// Ratio identity: every feasible margin pair of size `n` instead of regular `d`.
    pub all_margins: bool,
    pub max_ratio: Option<f64>,
    pub max_exceedance: Option<f64>,
    pub exceedance_t: f64,
    pub max_std: Option<f64>,
    pub ep_cap: Option<f64>,
    pub min_membership: Option<f64>,
    pub min_p_value: Option<f64>,
}

impl Default for Parameters {
    fn default() -> Self {
        Self {
            k1: 8.0,
            k2: 8.0,
            gamma: 1.0,
            c0: vec![0.001],
            c_deg: 6.0,
            l: None,
            c_codegree: crate::pstats::DEFAULT_C_CODEGREE,
            burn_in: None,
            spacing: None,
            samples_per_chain: 1,
            stride: None,
            q_generator: QGenerator::RankOne,
            step_law: StepLaw::Rademacher,
            steps: 100,
            t_grid: vec![],
            lambda_grid: vec![0.05, 0.1, 0.2],
            tol: 1e-8,
            restarts: 3,
            max_iter: 10_000,
            allow_outside_regime: false,
            all_margins: false,
            max_ratio: None,
            max_exceedance: None,
            exceedance_t: 10.0,
            max_std: None,
            ep_cap: None,
            min_membership: None,
            min_p_value: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub grid: Vec<GridCell>,
    pub trials: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub parameters: Parameters,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, grid: Vec<GridCell>, trials: u64, base_seed: u64) -> Self {
        Self { experiment, grid, trials, base_seed, parameters: Parameters::default(), output_path: None }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.parameters.samples_per_chain == 0 {
            return Err(HarnessError::Config("samples_per_chain must be at least 1".into()));
        }
        let sampled = !matches!(self.experiment, Experiment::Freedman | Experiment::RatioIdentity);
        if sampled && self.grid.is_empty() {
            return Err(HarnessError::Config(format!("{} needs a non-empty grid", self.experiment)));
        }
        if sampled && !self.parameters.allow_outside_regime && self.experiment != Experiment::Uniformity {
            for c in &self.grid {
                let deg = DegreeSequencePair::regular(c.n, c.d.min(c.n as u32))?;
                if !degree_condition_check(&deg, c.d) {
                    return Err(HarnessError::Config(format!(
                        "cell n = {}, d = {} is outside the degree regime (set allow_outside_regime to run it)",
                        c.n, c.d
                    )));
                }
            }
        }
        Ok(())
    }

    fn chain_config(&self, edges: u64, seed: u64) -> ChainConfig {
        let mut cfg = ChainConfig::default_for(edges, seed);
        if let Some(b) = self.parameters.burn_in {
            cfg.burn_in_switches = b;
        }
        if let Some(s) = self.parameters.spacing {
            cfg.spacing_switches = s.max(1);
        }
        cfg
    }

    fn spectral_options(&self, seed: u64) -> SpectralOptions {
        SpectralOptions {
            tol: self.parameters.tol,
            restarts: self.parameters.restarts,
            max_iter: self.parameters.max_iter,
            seed,
        }
    }
}

/// Reads only the `[parameters]` table of a config file, ignoring other keys.
pub fn parameters_from_toml(text: &str) -> Result<Parameters, HarnessError> {
    #[derive(Deserialize)]
    struct Partial {
        #[serde(default)]
        parameters: Parameters,
    }
    Ok(toml::from_str::<Partial>(text)?.parameters)
}

/// One row of output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment: Experiment,
    pub n: usize,
    pub d: u32,
    pub model: Model,
    pub trial: u64,
    /// Seed of the chain (or stream) that produced this trial.
    pub seed: u64,
    pub position: u64,
    pub values: Vec<f64>,
    pub wall_time: f64,
}

impl TrialRecord {
    /// Value of a named experiment column.
    pub fn get(&self, column: &str) -> Option<f64> {
        let idx = self.experiment.columns().iter().position(|c| *c == column)?;
        self.values.get(idx).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub key: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: Experiment,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryEntry>,
    pub assertions: Vec<AssertionOutcome>,
    pub skipped: Vec<String>,
}

impl Report {
    fn new(experiment: Experiment) -> Self {
        Self { experiment, records: Vec::new(), summary: Vec::new(), assertions: Vec::new(), skipped: Vec::new() }
    }

    fn note(&mut self, key: impl Into<String>, value: f64) {
        self.summary.push(SummaryEntry { key: key.into(), value });
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.assertions.push(AssertionOutcome { name: name.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|e| e.key == key).map(|e| e.value)
    }

    pub fn column(&self, column: &str) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.get(column)).collect()
    }

    /// CSV with the common prefix `experiment,n,d,model,trial,seed,position`
    /// then the experiment columns; `wall_time` last when `timing` is set.
    pub fn write_csv<W: Write>(&self, out: W, timing: bool) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["experiment", "n", "d", "model", "trial", "seed", "position"];
        header.extend_from_slice(self.experiment.columns());
        if timing {
            header.push("wall_time");
        }
        w.write_record(&header)?;
        for r in &self.records {
            let model = match r.model {
                Model::Directed => "directed",
                Model::Undirected => "undirected",
            };
            let mut row = vec![
                r.experiment.name().to_string(),
                r.n.to_string(),
                r.d.to_string(),
                model.to_string(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.position.to_string(),
            ];
            row.extend(r.values.iter().map(|v| v.to_string()));
            if timing {
                row.push(r.wall_time.to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Gnuplot script histogramming the headline column of `csv_path`.
    pub fn gnuplot_script(&self, csv_path: &Path) -> String {
        let column = match self.experiment {
            Experiment::Spectral => "s2_over_sqrt_d_centered",
            Experiment::Concentration => "z_normalized",
            Experiment::Freedman => "x_final",
            Experiment::Codegree => "ratio_to_d",
            Experiment::Ep => "statistic",
            Experiment::Corner => "s2_corner_ratio",
            Experiment::Uniformity => "cell",
            Experiment::RatioIdentity => "r",
            Experiment::Heavy => "heavy_sum",
        };
        let idx = 8 + self.experiment.columns().iter().position(|c| *c == column).unwrap_or(0);
        let png = csv_path.with_extension("png");
        format!(
            "set datafile separator ','\n\
             set terminal pngcairo size 900,600\n\
             set output '{png}'\n\
             set title '{exp}: {column}'\n\
             set style fill solid 0.5\n\
             binwidth = 0.05\n\
             bin(x) = binwidth * floor(x / binwidth)\n\
             stats '{csv}' using {idx} nooutput\n\
             binwidth = (STATS_max - STATS_min) / 40.0 + 1e-12\n\
             plot '{csv}' every ::1 using (bin(${idx})):(1.0) smooth frequency with boxes title '{column}'\n",
            png = png.display(),
            exp = self.experiment,
            csv = csv_path.display(),
        )
    }
}

/// Worker count: `SGL_THREADS` if set and positive, else all cores.
pub fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

#[cfg(feature = "parallel")]
fn par_map<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build() {
        Ok(pool) => pool.install(|| items.into_par_iter().map(&f).collect()),
        Err(_) => items.into_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    items.into_iter().map(f).collect()
}

/// Where a trial sits: its chain, position and seeds.
#[derive(Debug, Clone, Copy)]
struct Slot {
    trial: u64,
    chain_seed: u64,
    position: u64,
}

impl Slot {
    /// Seed for auxiliary randomness (test vectors, intervals) of this trial.
    fn aux_seed(&self) -> u64 {
        mix_seed(self.chain_seed, 1 << 40 | self.position)
    }
}

fn chains(cfg: &ExperimentConfig) -> Vec<Vec<Slot>> {
    let spc = cfg.parameters.samples_per_chain;
    let n_chains = cfg.trials.div_ceil(spc);
    (0..n_chains)
        .map(|c| {
            let chain_seed = mix_seed(cfg.base_seed, c);
            (c * spc..((c + 1) * spc).min(cfg.trials))
                .map(|t| Slot { trial: t, chain_seed, position: t - c * spc })
                .collect()
        })
        .collect()
}

enum Sample {
    Directed(Digraph01),
    Undirected(URegGraph),
}

enum Stream {
    Directed(DigraphSampler),
    Undirected(UndirectedSampler),
}

impl Stream {
    fn open(cfg: &ExperimentConfig, cell: &GridCell, seed: u64) -> Result<Self, HarnessError> {
        let edges = cell.n as u64 * cell.d as u64;
        Ok(match cell.model {
            Model::Directed => {
                let deg = DegreeSequencePair::regular(cell.n, cell.d)?;
                Stream::Directed(DigraphSampler::new(&deg, cfg.chain_config(edges, seed))?)
            }
            Model::Undirected => Stream::Undirected(UndirectedSampler::new(
                cell.n,
                cell.d as usize,
                cfg.chain_config(edges / 2, seed),
            )?),
        })
    }

    fn next_sample(&mut self) -> Sample {
        match self {
            Stream::Directed(s) => Sample::Directed(s.next().expect("infinite stream")),
            Stream::Undirected(s) => Sample::Undirected(s.next().expect("infinite stream")),
        }
    }
}

/// Feasibility of a regular cell; `Some(reason)` means skip.
fn cell_problem(cell: &GridCell) -> Option<String> {
    let (n, d) = (cell.n, cell.d as usize);
    match cell.model {
        Model::Directed => {
            if d > n {
                return Some(format!("d = {d} exceeds n = {n}"));
            }
            let deg = DegreeSequencePair::regular(n, cell.d).ok()?;
            (!gale_ryser_feasible(&deg)).then(|| "margins not realizable".to_string())
        }
        Model::Undirected => {
            ((n * d) % 2 == 1 || d >= n).then(|| format!("no simple {d}-regular graph on {n} vertices"))
        }
    }
}

/// Runs `per_trial` on every sampled graph of `cell`, chains in parallel.
fn run_sampled<F>(cfg: &ExperimentConfig, cell: &GridCell, per_trial: F) -> Result<Vec<TrialRecord>, HarnessError>
where
    F: Fn(&Sample, &Slot) -> Result<Vec<Vec<f64>>, HarnessError> + Sync + Send,
{
    let results = par_map(chains(cfg), |slots| -> Result<Vec<TrialRecord>, HarnessError> {
        let Some(first) = slots.first() else { return Ok(Vec::new()) };
        let mut stream = Stream::open(cfg, cell, first.chain_seed)?;
        let mut out = Vec::new();
        for slot in &slots {
            let started = Instant::now();
            let sample = stream.next_sample();
            let rows = per_trial(&sample, slot)?;
            let wall_time = started.elapsed().as_secs_f64();
            for values in rows {
                out.push(TrialRecord {
                    experiment: cfg.experiment,
                    n: cell.n,
                    d: cell.d,
                    model: cell.model,
                    trial: slot.trial,
                    seed: slot.chain_seed,
                    position: slot.position,
                    values,
                    wall_time,
                });
            }
        }
        Ok(out)
    });
    let mut records = Vec::new();
    for r in results {
        records.extend(r?);
    }
    Ok(records)
}

fn for_each_cell(
    cfg: &ExperimentConfig,
    report: &mut Report,
    mut body: impl FnMut(&GridCell, &mut Report) -> Result<(), HarnessError>,
) -> Result<(), HarnessError> {
    for cell in &cfg.grid {
        if let Some(reason) = cell_problem(cell) {
            report.skipped.push(format!("n = {}, d = {}: {reason}", cell.n, cell.d));
            continue;
        }
        body(cell, report)?;
    }
    Ok(())
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

fn cell_tag(cell: &GridCell) -> String {
    format!("n={},d={}", cell.n, cell.d)
}

/// Runs the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::Spectral => run_spectral(cfg),
        Experiment::Concentration => run_concentration(cfg),
        Experiment::Freedman => run_freedman(cfg),
        Experiment::Codegree => run_codegree(cfg),
        Experiment::Ep => run_ep(cfg),
        Experiment::Corner => run_corner(cfg),
        Experiment::Uniformity => run_uniformity(cfg),
        Experiment::RatioIdentity => run_ratio_identity(cfg),
        Experiment::Heavy => run_heavy(cfg),
    }
}

pub fn run_spectral(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let mut report = Report::new(Experiment::Spectral);
    for_each_cell(cfg, &mut report, |cell, report| {
        let d = cell.d as f64;
        let centered_scale = (d * (1.0 - d / cell.n as f64)).sqrt();
        let records = run_sampled(cfg, cell, |sample, slot| {
            let opts = cfg.spectral_options(slot.aux_seed());
            let s = match sample {
                Sample::Directed(g) => s2_digraph(g, &opts)?,
                Sample::Undirected(g) => lambda_extreme(g, &opts)?,
            };
            Ok(vec![vec![
                s.s1,
                s.s2,
                s.s2 / d.sqrt(),
                s.s2 / centered_scale,
                s.lambda_extreme.unwrap_or(f64::NAN),
                s.top_overlap,
                flag(s.converged),
                flag(s.disagreement),
                s.iterations as f64,
            ]])
        })?;
        let ratios: Vec<f64> = records.iter().filter_map(|r| r.get("s2_over_sqrt_d_centered")).collect();
        let tag = cell_tag(cell);
        report.note(format!("{tag}:median_ratio"), quantile(&ratios, 0.5));
        report.note(format!("{tag}:max_ratio"), quantile(&ratios, 1.0));
        report.note(format!("{tag}:q90_ratio"), quantile(&ratios, 0.9));
        let unconverged = records.iter().filter(|r| r.get("converged") == Some(0.0)).count();
        report.note(format!("{tag}:unconverged"), unconverged as f64);
        if cell.model == Model::Directed {
            for r in &records {
                let s1 = r.get("s1").unwrap_or(f64::NAN);
                let overlap = r.get("top_overlap").unwrap_or(f64::NAN);
                if (s1 - d).abs() > 1e-8 * d || overlap < 1.0 - 1e-8 {
                    report.check(
                        "regular top pair",
                        false,
                        format!("trial {} (seed {}): s1 = {s1}, overlap = {overlap}, d = {d}", r.trial, r.seed),
                    );
                }
            }
        }
        if let Some(cap) = cfg.parameters.max_ratio {
            let worst = records
                .iter()
                .max_by(|a, b| a.values[3].total_cmp(&b.values[3]))
                .expect("at least one trial");
            report.check(
                format!("{tag}: s2/sqrt(d(1-d/n)) <= {cap}"),
                worst.values[3] <= cap,
                format!("max {} at trial {} (seed {})", worst.values[3], worst.trial, worst.seed),
            );
        }
        report.records.extend(records);
        Ok(())
    })?;
    Ok(report)
}

/// Test matrix for the linear-form experiment; `‖Q‖_HS = 1` except for `Zero`.
pub fn generate_q(kind: QGenerator, n: usize, d: u32, seed: u64) -> Result<DenseMatrix, HarnessError> {
    let mut rng = rng_from_seed(seed);
    Ok(match kind {
        QGenerator::RankOne => {
            let (x, y) = sample_unit_pair(n, &mut rng)?;
            DenseMatrix::outer(&x, &y)
        }
        QGenerator::RankOneLight => {
            let (x, y) = sample_unit_pair(n, &mut rng)?;
            let threshold = (d as f64).sqrt() / n as f64;
            DenseMatrix::from_fn(n, n, |i, j| {
                let v = x[i] * y[j];
                if v.abs() > threshold {
                    0.0
                } else {
                    v
                }
            })
        }
        QGenerator::RandomSign => {
            let s = 1.0 / n as f64;
            DenseMatrix::from_fn(n, n, |_, _| if rng.random::<bool>() { s } else { -s })
        }
        QGenerator::Block => {
            let h = (n / 2).max(1);
            let s = 1.0 / h as f64;
            DenseMatrix::from_fn(n, n, |i, j| if i < h && j < h { s } else { 0.0 })
        }
        QGenerator::Zero => DenseMatrix::zeros(n, n),
        QGenerator::Ones => DenseMatrix::from_fn(n, n, |_, _| 1.0),
    })
}

/// `Σ M_ij Q_ij − (d/n) Σ Q_ij`.
pub fn linear_form_deviation(g: &Digraph01, q: &DenseMatrix, d: f64) -> f64 {
    let hit: f64 = g.edges().map(|(i, j)| q[(i, j)]).sum();
    hit - d / g.n() as f64 * q.sum()
}

pub fn run_concentration(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let mut report = Report::new(Experiment::Concentration);
    let p = &cfg.parameters;
    let c0 = p.c0.first().copied().unwrap_or(0.001);
    for (index, cell) in cfg.grid.iter().enumerate() {
        if cell.model != Model::Directed {
            report.skipped.push(format!("{}: concentration runs on directed models only", cell_tag(cell)));
            continue;
        }
        if let Some(reason) = cell_problem(cell) {
            report.skipped.push(format!("{}: {reason}", cell_tag(cell)));
            continue;
        }
        let q = generate_q(p.q_generator, cell.n, cell.d, mix_seed(cfg.base_seed, u64::MAX - index as u64))?;
        let d = cell.d as f64;
        let hs = q.hs_norm_sq().sqrt();
        let scale = d.sqrt() * hs;
        let stride = p.stride.unwrap_or_else(|| default_stride(cell.n));
        let records = run_sampled(cfg, cell, |sample, _| {
            let Sample::Directed(g) = sample else { unreachable!("directed cell") };
            let z = linear_form_deviation(g, &q, d);
            let (ep, accepted) = match p.l {
                Some(l) => {
                    let s = ep_scan(g, c0, stride)?.statistic;
                    (s, s <= l)
                }
                None => (f64::NAN, true),
            };
            let zn = if scale > 0.0 { z / scale } else { 0.0 };
            Ok(vec![vec![z, zn, hs, ep, flag(accepted)]])
        })?;
        let tag = cell_tag(cell);
        let accepted: Vec<&TrialRecord> = records.iter().filter(|r| r.get("accepted") == Some(1.0)).collect();
        report.note(format!("{tag}:accepted_fraction"), accepted.len() as f64 / records.len() as f64);
        let zn: Vec<f64> = accepted.iter().filter_map(|r| r.get("z_normalized")).collect();
        let (mean, std) = mean_std(&zn);
        report.note(format!("{tag}:mean_normalized"), mean);
        report.note(format!("{tag}:std_normalized"), std);
        let zs: Vec<f64> = accepted.iter().filter_map(|r| r.get("z")).collect();
        let qstats = QStats::of_matrix(&q, cell.d);
        for k in [2.0, 4.0, 6.0, 8.0, 10.0] {
            let t = k * scale;
            let freq = zs.iter().filter(|z| z.abs() > t).count() as f64 / zs.len().max(1) as f64;
            report.note(format!("{tag}:exceed@{k}"), freq);
            if qstats.qinf > 0.0 {
                report.note(format!("{tag}:bound@{k}"), linear_form_tail_bound(t, qstats, p.gamma)?);
            }
        }
        report.note(format!("{tag}:shift_delta"), shift_delta(&q, cell.d)?);
        report.note(format!("{tag}:shift_dense"), d * d / (cell.n * cell.n) as f64 * q.sum());
        if let Some(max) = p.max_exceedance {
            let t = p.exceedance_t * scale;
            let freq = zs.iter().filter(|z| z.abs() > t).count() as f64 / zs.len().max(1) as f64;
            report.check(
                format!("{tag}: P(|Z| > {}·sqrt(d)·|Q|_HS) <= {max}", p.exceedance_t),
                freq <= max,
                format!("empirical {freq} over {} samples", zs.len()),
            );
        }
        if let Some(max) = p.max_std {
            report.check(format!("{tag}: std(Z/(sqrt(d)|Q|_HS)) <= {max}"), std <= max, format!("std {std}"));
        }
        report.records.extend(records);
    }
    Ok(report)
}

pub fn run_freedman(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let mut report = Report::new(Experiment::Freedman);
    let p = &cfg.parameters;
    let law = p.step_law;
    let steps = p.steps;
    let trials: Vec<u64> = (0..cfg.trials).collect();
    let finals: Vec<f64> = par_map(trials.clone(), |t| {
        let mut rng = rng_from_seed(mix_seed(cfg.base_seed, t));
        (0..steps).map(|_| law.draw(&mut rng)).sum()
    });
    for (t, &x) in trials.iter().zip(&finals) {
        report.records.push(TrialRecord {
            experiment: Experiment::Freedman,
            n: steps,
            d: 0,
            model: Model::Directed,
            trial: *t,
            seed: mix_seed(cfg.base_seed, *t),
            position: 0,
            values: vec![x],
            wall_time: 0.0,
        });
    }
    let (m, s2) = law.params();
    let params = MartingaleParams::new(m, s2 * steps as f64)?;
    let runs = finals.len() as f64;
    let t_grid = if p.t_grid.is_empty() { vec![5.0, 10.0, 15.0, 20.0, 25.0] } else { p.t_grid.clone() };
    for t in t_grid {
        let freq = finals.iter().filter(|&&x| x >= t).count() as f64 / runs;
        let se = (freq * (1.0 - freq) / runs).sqrt();
        let bound = bennett_tail(t, params)?;
        report.note(format!("tail@{t}:empirical"), freq);
        report.note(format!("tail@{t}:bennett"), bound);
        report.check(
            format!("P(X >= {t}) <= bennett + 3 se"),
            freq <= bound + 3.0 * se,
            format!("empirical {freq}, bound {bound}, se {se}"),
        );
    }
    for &lambda in &p.lambda_grid {
        let vals: Vec<f64> = finals.iter().map(|x| (lambda * x).exp()).collect();
        let (mean, std) = mean_std(&vals);
        let se = std / runs.sqrt();
        let bound = freedman_mgf_bound(lambda, params)?;
        report.note(format!("mgf@{lambda}:empirical"), mean);
        report.note(format!("mgf@{lambda}:bound"), bound);
        report.check(
            format!("E exp({lambda} X) <= mgf bound + 3 se"),
            mean <= bound + 3.0 * se,
            format!("empirical {mean}, bound {bound}, se {se}"),
        );
    }
    Ok(report)
}

pub fn run_codegree(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let mut report = Report::new(Experiment::Codegree);
    let c0 = cfg.parameters.c0.first().copied().unwrap_or(0.001);
    for_each_cell(cfg, &mut report, |cell, report| {
        let len = max_interval_len(cell.n, c0);
        let records = run_sampled(cfg, cell, |sample, slot| {
            let g = match sample {
                Sample::Directed(g) => g.clone(),
                Sample::Undirected(g) => g.as_digraph(),
            };
            let mut rng = rng_from_seed(slot.aux_seed());
            let start = rng.random_range(0..=cell.n - len);
            let interval: Vec<usize> = (start..start + len).collect();
            let empty = codegree_max(&g, &[])? as f64;
            let within = codegree_max(&g, &interval)? as f64;
            Ok(vec![vec![start as f64, len as f64, empty, within, empty.max(within) / cell.d as f64]])
        })?;
        let worst = records.iter().map(|r| r.values[4]).fold(0.0, f64::max);
        let tag = cell_tag(cell);
        report.note(format!("{tag}:max_ratio_to_d"), worst);
        let bad = records.iter().find(|r| r.values[4] >= 0.9);
        report.check(
            format!("{tag}: codegree < 0.9 d"),
            bad.is_none(),
            bad.map_or(format!("max ratio {worst}"), |r| {
                format!("trial {} (seed {}): codegree {} >= 0.9·{}", r.trial, r.seed, r.values[2].max(r.values[3]), cell.d)
            }),
        );
        report.records.extend(records);
        Ok(())
    })?;
    Ok(report)
}

pub fn run_ep(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let mut report = Report::new(Experiment::Ep);
    let p = &cfg.parameters;
    for_each_cell(cfg, &mut report, |cell, report| {
        let stride = p.stride.unwrap_or_else(|| default_stride(cell.n));
        let records = run_sampled(cfg, cell, |sample, _| {
            let g = match sample {
                Sample::Directed(g) => g.clone(),
                Sample::Undirected(g) => g.as_digraph(),
            };
            p.c0.iter()
                .map(|&c0| {
                    let scan = ep_scan(&g, c0, stride)?;
                    Ok(vec![
                        c0,
                        stride as f64,
                        max_interval_len(cell.n, c0) as f64,
                        scan.statistic,
                        scan.start as f64,
                        scan.len as f64,
                    ])
                })
                .collect()
        })?;
        let tag = cell_tag(cell);
        for &c0 in &p.c0 {
            let stats: Vec<f64> = records.iter().filter(|r| r.values[0] == c0).map(|r| r.values[3]).collect();
            report.note(format!("{tag}:c0={c0}:median"), quantile(&stats, 0.5));
            report.note(format!("{tag}:c0={c0}:max"), quantile(&stats, 1.0));
            report.check(
                format!("{tag}: c0={c0}: statistic finite"),
                stats.iter().all(|s| s.is_finite()),
                format!("{} trials", stats.len()),
            );
            if let Some(cap) = p.ep_cap {
                let max = quantile(&stats, 1.0);
                report.check(format!("{tag}: c0={c0}: statistic <= {cap}"), max <= cap, format!("max {max}"));
            }
        }
        report.records.extend(records);
        Ok(())
    })?;
    Ok(report)
}

/// Largest `|dᵢ − target|`.
fn max_deviation(deg: &[u32], target: f64) -> f64 {
    deg.iter().map(|&v| (v as f64 - target).abs()).fold(0.0, f64::max)
}

pub fn run_corner(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let mut report = Report::new(Experiment::Corner);
    let p = &cfg.parameters;
    for_each_cell(cfg, &mut report, |cell, report| {
        if cell.model != Model::Undirected {
            report.skipped.push(format!("{}: corner runs on undirected models only", cell_tag(cell)));
            return Ok(());
        }
        let d = cell.d as f64;
        let half = d / 2.0;
        let delta = p.c_deg * d.sqrt();
        let records = run_sampled(cfg, cell, |sample, slot| {
            let Sample::Undirected(g) = sample else { unreachable!("undirected cell") };
            let t = corner_submatrix(g);
            let (din, dout) = (t.in_degrees(), t.out_degrees());
            let member = deg_membership(&din, &dout, half, delta)?;
            let opts = cfg.spectral_options(slot.aux_seed());
            let s2 = if t.edge_count() == 0 { 0.0 } else { s2_digraph(&t, &opts)?.s2 };
            let lam = lambda_extreme(g, &opts)?.s2;
            Ok(vec![vec![
                t.n() as f64,
                flag(member),
                max_deviation(&din, half),
                max_deviation(&dout, half),
                s2,
                s2 / half.sqrt(),
                lam,
                lam / d.sqrt(),
            ]])
        })?;
        let tag = cell_tag(cell);
        let rate = records.iter().filter(|r| r.values[1] == 1.0).count() as f64 / records.len() as f64;
        report.note(format!("{tag}:membership_rate"), rate);
        let worst = records.iter().map(|r| r.values[5]).fold(0.0, f64::max);
        report.note(format!("{tag}:max_corner_ratio"), worst);
        if let Some(min) = p.min_membership {
            report.check(format!("{tag}: membership rate >= {min}"), rate >= min, format!("rate {rate}"));
        }
        if let Some(cap) = p.max_ratio {
            report.check(format!("{tag}: s2(T)/sqrt(d/2) <= {cap}"), worst <= cap, format!("max {worst}"));
        }
        report.records.extend(records);
        Ok(())
    })?;
    Ok(report)
}

pub fn run_uniformity(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let mut report = Report::new(Experiment::Uniformity);
    for_each_cell(cfg, &mut report, |cell, report| {
        let deg = DegreeSequencePair::regular(cell.n, cell.d)?;
        let all = enumerate_all(&deg)?;
        let index: HashMap<Digraph01, usize> = all.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        let records = run_sampled(cfg, cell, |sample, _| {
            let Sample::Directed(g) = sample else { unreachable!("directed cell") };
            Ok(vec![vec![index[g] as f64]])
        })?;
        let mut counts = vec![0u64; all.len()];
        for r in &records {
            counts[r.values[0] as usize] += 1;
        }
        let (stat, pval) = chi_square_uniformity(&counts)?;
        let tag = cell_tag(cell);
        report.note(format!("{tag}:cells"), all.len() as f64);
        report.note(format!("{tag}:chi_square"), stat);
        report.note(format!("{tag}:p_value"), pval);
        let alpha = cfg.parameters.min_p_value.unwrap_or(0.001);
        report.check(format!("{tag}: chi-square p > {alpha}"), pval > alpha, format!("statistic {stat}, p {pval}"));
        report.records.extend(records);
        Ok(())
    })?;
    Ok(report)
}

/// Every feasible margin pair on `n` vertices.
pub fn all_margin_pairs(n: usize) -> Vec<DegreeSequencePair> {
    let vectors: Vec<Vec<u32>> = (0..(n as u64 + 1).pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let v = (code % (n as u64 + 1)) as u32;
                    code /= n as u64 + 1;
                    v
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for a in &vectors {
        for b in &vectors {
            if let Ok(deg) = DegreeSequencePair::new(a.clone(), b.clone()) {
                if gale_ryser_feasible(&deg) {
                    out.push(deg);
                }
            }
        }
    }
    out
}

pub fn run_ratio_identity(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let mut report = Report::new(Experiment::RatioIdentity);
    let guard = EnumerationGuard::default();
    let mut config_index = 0u64;
    let (mut rows, mut violations, mut exchanged_violations) = (0u64, 0u64, 0u64);
    for cell in &cfg.grid {
        let margins = if cfg.parameters.all_margins {
            all_margin_pairs(cell.n)
        } else {
            let deg = DegreeSequencePair::regular(cell.n, cell.d)?;
            if !gale_ryser_feasible(&deg) {
                report.skipped.push(format!("{}: margins not realizable", cell_tag(cell)));
                continue;
            }
            vec![deg]
        };
        for deg in margins {
            for c in all_ratio_configurations(&deg, guard)? {
                for r in &c.rows {
                    rows += 1;
                    violations += (!r.ok) as u64;
                    exchanged_violations += (!r.exchanged_ok) as u64;
                    report.records.push(TrialRecord {
                        experiment: Experiment::RatioIdentity,
                        n: cell.n,
                        d: cell.d,
                        model: Model::Directed,
                        trial: config_index,
                        seed: 0,
                        position: 0,
                        values: vec![
                            config_index as f64,
                            r.r as f64,
                            r.count_v as f64,
                            r.count_v_prime as f64,
                            r.p_k as f64,
                            r.p_l as f64,
                            flag(r.ok),
                            flag(r.exchanged_ok),
                        ],
                        wall_time: 0.0,
                    });
                }
                config_index += 1;
            }
        }
    }
    report.note("configurations", config_index as f64);
    report.note("rows", rows as f64);
    report.note("violations", violations as f64);
    report.note("exchanged_violations", exchanged_violations as f64);
    report.check(
        "count_v (p_l - r) = count_v' (p_k - r)",
        violations == 0,
        format!("{violations} violations in {rows} rows"),
    );
    Ok(report)
}

pub fn run_heavy(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let mut report = Report::new(Experiment::Heavy);
    let p = &cfg.parameters;
    for_each_cell(cfg, &mut report, |cell, report| {
        let d = cell.d as f64;
        let records = run_sampled(cfg, cell, |sample, slot| {
            let g = match sample {
                Sample::Directed(g) => g.clone(),
                Sample::Undirected(g) => g.as_digraph(),
            };
            let mut rng = rng_from_seed(slot.aux_seed());
            let (x, y) = sample_unit_pair(cell.n, &mut rng)?;
            let cert = heavy_certificate(&g, &x, &y, p.k1, p.k2, d)?;
            let b = bilinear_form(&g, &x, &y)?;
            let err = (cert.light_sum + cert.heavy_sum - b).abs() / (1.0 + b.abs());
            Ok(vec![vec![
                b,
                cert.light_sum,
                cert.heavy_sum,
                cert.heavy_count as f64,
                cert.bound,
                flag(cert.all_pass),
                flag(cert.implication_holds),
                err,
            ]])
        })?;
        let tag = cell_tag(cell);
        let total = records.len() as f64;
        let pass = records.iter().filter(|r| r.values[5] == 1.0).count() as f64;
        report.note(format!("{tag}:certification_rate"), pass / total);
        let broken = records.iter().find(|r| r.values[6] != 1.0);
        report.check(
            format!("{tag}: all level pairs pass => |heavy_sum| <= 2U sqrt(d)"),
            broken.is_none(),
            broken.map_or("never violated".into(), |r| format!("trial {} (seed {})", r.trial, r.seed)),
        );
        let worst = records.iter().map(|r| r.values[7]).fold(0.0, f64::max);
        report.note(format!("{tag}:max_decomposition_error"), worst);
        report.check(format!("{tag}: light + heavy = bilinear"), worst <= 1e-10, format!("max relative error {worst}"));
        let heavy_ok = records.iter().all(|r| r.values[3] <= (cell.n * cell.n) as f64 / d);
        report.check(format!("{tag}: heavy couples <= n^2/d"), heavy_ok, String::new());
        report.records.extend(records);
        Ok(())
    })?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(n: usize, d: u32, model: Model) -> GridCell {
        GridCell { n, d, model }
    }

    #[test]
    fn config_round_trip_and_validation() {
        let text = r#"
            experiment = "spectral"
            trials = 3
            base_seed = 7
            grid = [{ n = 32, d = 4 }, { n = 16, d = 3, model = "undirected" }]
            [parameters]
            k1 = 4.0
            c0 = [0.05, 0.1]
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.experiment, Experiment::Spectral);
        assert_eq!(cfg.grid[1].model, Model::Undirected);
        assert_eq!(cfg.parameters.k1, 4.0);
        assert_eq!(cfg.parameters.k2, 8.0);
        cfg.validate().unwrap();
        let bad = ExperimentConfig::from_toml("experiment = \"spectral\"\ntrials = 0\ngrid=[{n=8,d=2}]");
        assert!(bad.unwrap().validate().is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"nope\"\ntrials = 1").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"ep\"\ntrials = 1\n[parameters]\nbogus = 1").is_err());
        let out = ExperimentConfig::new(Experiment::Spectral, vec![cell(4, 3, Model::Undirected)], 1, 0);
        assert!(out.validate().is_err());
    }

    #[test]
    fn parameters_table_alone() {
        let p = parameters_from_toml("trials = 4\n[parameters]\nk2 = 2.5\nstride = 3").unwrap();
        assert_eq!((p.k1, p.k2, p.stride), (8.0, 2.5, Some(3)));
        assert_eq!(parameters_from_toml("").unwrap(), Parameters::default());
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
    }

    #[test]
    fn spectral_k4_ratio() {
        let mut cfg = ExperimentConfig::new(Experiment::Spectral, vec![cell(4, 3, Model::Undirected)], 2, 1);
        cfg.parameters.allow_outside_regime = true;
        let rep = run(&cfg).unwrap();
        for r in &rep.records {
            assert!((r.get("s2_over_sqrt_d").unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-8);
        }
    }

    #[test]
    fn spectral_records_repeat_and_skip_infeasible() {
        let mut cfg = ExperimentConfig::new(
            Experiment::Spectral,
            vec![cell(24, 4, Model::Directed), cell(9, 3, Model::Undirected)],
            2,
            5,
        );
        cfg.parameters.allow_outside_regime = true;
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        let strip = |r: &Report| {
            r.records.iter().map(|t| (t.trial, t.seed, t.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>())).collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(a.skipped.len(), 1);
        assert!(a.passed(), "{:?}", a.assertions);
        let mut x = Vec::new();
        let mut y = Vec::new();
        a.write_csv(&mut x, false).unwrap();
        b.write_csv(&mut y, false).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        assert!(text.starts_with("experiment,n,d,model,trial,seed,position,s1,s2,"));
        assert!(!text.contains("wall_time"));
    }

    #[test]
    fn trials_replay_in_isolation() {
        let mut cfg = ExperimentConfig::new(Experiment::Spectral, vec![cell(20, 4, Model::Directed)], 6, 11);
        cfg.parameters.samples_per_chain = 3;
        cfg.parameters.allow_outside_regime = true;
        let full = run(&cfg).unwrap();
        let r = &full.records[4];
        assert_eq!((r.position, r.seed), (1, mix_seed(11, 1)));
        let deg = DegreeSequencePair::regular(20, 4).unwrap();
        let mut s = DigraphSampler::new(&deg, cfg.chain_config(80, r.seed)).unwrap();
        let g = s.nth(r.position as usize).unwrap();
        let slot = Slot { trial: 4, chain_seed: r.seed, position: r.position };
        let again = s2_digraph(&g, &cfg.spectral_options(slot.aux_seed())).unwrap();
        assert_eq!(again.s2, r.get("s2").unwrap());
    }

    #[test]
    fn concentration_trivial_generators() {
        for (kind, n, d) in [(QGenerator::Zero, 16, 4), (QGenerator::Ones, 16, 4)] {
            let mut cfg = ExperimentConfig::new(Experiment::Concentration, vec![cell(n, d, Model::Directed)], 5, 3);
            cfg.parameters.q_generator = kind;
            cfg.parameters.allow_outside_regime = true;
            let rep = run(&cfg).unwrap();
            assert!(rep.column("z").iter().all(|z| z.abs() < 1e-9), "{kind:?}");
        }
    }

    #[test]
    fn q_generators_have_unit_hs_norm() {
        for kind in [QGenerator::RankOne, QGenerator::RandomSign, QGenerator::Block] {
            let q = generate_q(kind, 20, 4, 1).unwrap();
            assert!((q.hs_norm_sq() - 1.0).abs() < 1e-12, "{kind:?}");
        }
        let light = generate_q(QGenerator::RankOneLight, 20, 4, 1).unwrap();
        assert!(light.max_abs() <= 2.0 / 20.0 + 1e-15);
    }

    #[test]
    fn freedman_zero_and_rademacher() {
        let mut cfg = ExperimentConfig::new(Experiment::Freedman, vec![], 2000, 7);
        cfg.parameters.step_law = StepLaw::Zero;
        let rep = run(&cfg).unwrap();
        assert!(rep.column("x_final").iter().all(|&x| x == 0.0));
        assert_eq!(rep.summary_value("tail@5:empirical"), Some(0.0));
        assert!(rep.passed());
        cfg.parameters.step_law = StepLaw::Rademacher;
        let rep = run(&cfg).unwrap();
        assert!(rep.passed(), "{:?}", rep.assertions);
        let b = rep.summary_value("tail@20:bennett").unwrap();
        let h = crate::tailbounds::h_func(0.2).unwrap();
        assert!((b - (-100.0 * h).exp()).abs() < 1e-15);
    }

    #[test]
    fn codegree_and_ep_small() {
        let mut cfg = ExperimentConfig::new(Experiment::Codegree, vec![cell(64, 16, Model::Directed)], 3, 2);
        cfg.parameters.c0 = vec![0.05];
        let rep = run(&cfg).unwrap();
        assert_eq!(rep.records.len(), 3);
        assert!(rep.records.iter().all(|r| r.get("interval_len") == Some(3.0)));
        cfg.experiment = Experiment::Ep;
        cfg.parameters.c0 = vec![0.001, 0.05];
        let rep = run(&cfg).unwrap();
        assert_eq!(rep.records.len(), 6);
        // c0·n < 1 admits only the empty interval: dispersion of constant degrees
        assert!(rep.records.iter().filter(|r| r.values[0] == 0.001).all(|r| r.values[3] == 0.0));
        assert!(rep.passed());
    }

    #[test]
    fn corner_small() {
        let mut cfg = ExperimentConfig::new(Experiment::Corner, vec![cell(64, 16, Model::Undirected)], 3, 2);
        cfg.parameters.min_membership = Some(0.0);
        let rep = run(&cfg).unwrap();
        assert_eq!(rep.records.len(), 3);
        assert!(rep.records.iter().all(|r| r.get("corner_n") == Some(32.0)));
    }

    #[test]
    fn uniformity_small() {
        let mut cfg = ExperimentConfig::new(Experiment::Uniformity, vec![cell(3, 2, Model::Directed)], 6000, 1);
        cfg.parameters.samples_per_chain = 6000;
        cfg.parameters.burn_in = Some(100);
        cfg.parameters.spacing = Some(20);
        let rep = run(&cfg).unwrap();
        assert_eq!(rep.summary_value("n=3,d=2:cells"), Some(6.0));
        assert!(rep.passed(), "{:?}", rep.assertions);
    }

    #[test]
    fn ratio_identity_small() {
        let mut cfg = ExperimentConfig::new(Experiment::RatioIdentity, vec![cell(3, 0, Model::Directed)], 1, 0);
        cfg.parameters.all_margins = true;
        let rep = run(&cfg).unwrap();
        assert!(rep.passed());
        assert!(rep.summary_value("exchanged_violations").unwrap() > 0.0);
    }

    #[test]
    fn heavy_small() {
        let cfg = ExperimentConfig::new(Experiment::Heavy, vec![cell(64, 8, Model::Directed)], 5, 4);
        let rep = run(&cfg).unwrap();
        assert!(rep.passed(), "{:?}", rep.assertions);
    }

    #[test]
    fn json_and_gnuplot() {
        let cfg = ExperimentConfig::new(Experiment::Freedman, vec![], 10, 1);
        let rep = run(&cfg).unwrap();
        let back: Report = serde_json::from_str(&rep.to_json().unwrap()).unwrap();
        assert_eq!(back.records.len(), 10);
        let gp = rep.gnuplot_script(Path::new("out/freedman.csv"));
        assert!(gp.contains("out/freedman.csv") && gp.contains("using 8"));
    }

    #[test]
    fn margin_pairs_n2() {
        // (d_in, d_out) with equal sums and a realization
        let pairs = all_margin_pairs(2);
        assert!(pairs.iter().all(gale_ryser_feasible));
        assert_eq!(pairs.len(), 1 + 4 + 5 + 4 + 1);
    }

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
        assert!(quantile(&[], 0.5).is_nan());
    }
}
