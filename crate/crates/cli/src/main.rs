use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use specgap::discrepancy::heavy_certificate;
use specgap::graph::{format_graph, format_matrix_market, read_graph, Graph, Interval};
use specgap::harness::{self, Experiment, ExperimentConfig, GridCell, Model, Parameters};
use specgap::pstats::{codegree_max, default_stride, ep_scan};
use specgap::rng::{mix_seed, rng_from_seed};
use specgap::sampler::{enumerate_all, ChainConfig, DigraphSampler, UndirectedSampler};
use specgap::spectral::{lambda_extreme, s2_digraph, sample_unit_pair, SpectralOptions};
use specgap::DegreeSequencePair;

#[derive(Parser, Debug)]
#[command(name = "specgap", version, about = "Random regular graphs: sampling, spectra and Monte Carlo checks")]
struct Cli {
    /// TOML config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample regular graphs with the switch chain.
    Sample(SampleArgs),
    /// Top two singular values (directed) or the extreme nontrivial eigenvalue (undirected), as JSON.
    Spectrum(SpectrumArgs),
    /// Interval dispersion statistic, as JSON.
    Pstats(PstatsArgs),
    /// Largest common in-neighbourhood outside an interval, as JSON.
    Codegree(CodegreeArgs),
    /// Heavy-couple certificate for a random unit pair, as JSON.
    HeavyBound(HeavyArgs),
    /// Run a Monte Carlo experiment and check its assertions.
    Verify(VerifyArgs),
    /// Count 0-1 matrices with constant row and column sums.
    Enumerate(EnumerateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Directed,
    Undirected,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Edges,
    Mtx,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: u32,
    #[arg(long, value_enum, default_value = "directed")]
    model: ModelArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long)]
    spacing: Option<u64>,
    #[arg(long, value_enum, default_value = "edges")]
    format: FormatArg,
    /// File for one sample, directory for several; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    graph: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct PstatsArgs {
    graph: PathBuf,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args, Debug)]
struct CodegreeArgs {
    graph: PathBuf,
    /// Excluded interval as `start:len` (0-based); empty by default.
    #[arg(long)]
    interval: Option<String>,
}

#[derive(Args, Debug)]
struct HeavyArgs {
    graph: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    k2: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    experiment: Option<Experiment>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// Grid cell as `n,d` or `n,d,undirected`; repeatable, replaces the config grid.
    #[arg(long = "cell")]
    cells: Vec<String>,
    #[arg(long)]
    samples_per_chain: Option<u64>,
    #[arg(long)]
    allow_outside_regime: bool,
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Emit the full report as JSON instead of CSV.
    #[arg(long)]
    json: bool,
    /// Add a wall_time column.
    #[arg(long)]
    timing: bool,
    /// Write a gnuplot script for the CSV (needs --output).
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: u32,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Assertion,
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion) => ExitCode::from(2),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn config_text(path: &Option<PathBuf>) -> Result<Option<String>, Failure> {
    path.as_ref()
        .map(|p| std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))))
        .transpose()
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let text = config_text(&cli.config)?;
    let params = match &text {
        Some(t) => harness::parameters_from_toml(t)?,
        None => Parameters::default(),
    };
    match cli.command {
        Command::Sample(a) => sample(a, &params),
        Command::Spectrum(a) => spectrum(a, &params),
        Command::Pstats(a) => pstats(a, &params),
        Command::Codegree(a) => codegree(a),
        Command::HeavyBound(a) => heavy(a, &params),
        Command::Verify(a) => verify(a, text.as_deref()),
        Command::Enumerate(a) => {
            let deg = DegreeSequencePair::regular(a.n, a.d)?;
            writeln!(io::stdout().lock(), "{}", enumerate_all(&deg)?.len())?;
            Ok(())
        }
    }
}

fn print_json(value: &serde_json::Value) -> Result<(), Failure> {
    writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn sample(a: SampleArgs, params: &Parameters) -> Result<(), Failure> {
    let edges = a.n as u64 * a.d as u64;
    let mut cfg = ChainConfig::default_for(edges, a.seed);
    if let Some(b) = a.burn_in.or(params.burn_in) {
        cfg.burn_in_switches = b;
    }
    if let Some(s) = a.spacing.or(params.spacing) {
        cfg.spacing_switches = s.max(1);
    }
    let graphs: Vec<Graph> = match a.model {
        ModelArg::Directed => {
            let deg = DegreeSequencePair::regular(a.n, a.d)?;
            DigraphSampler::new(&deg, cfg)?.take(a.count).map(Graph::Directed).collect()
        }
        ModelArg::Undirected => {
            UndirectedSampler::new(a.n, a.d as usize, cfg)?.take(a.count).map(Graph::Undirected).collect()
        }
    };
    let render = |g: &Graph| match a.format {
        FormatArg::Edges => format_graph(g),
        FormatArg::Mtx => format_matrix_market(g),
    };
    match (&a.output, graphs.as_slice()) {
        (None, _) => {
            let mut out = io::stdout().lock();
            for g in &graphs {
                out.write_all(render(g).as_bytes())?;
            }
        }
        (Some(path), [g]) => std::fs::write(path, render(g))?,
        (Some(dir), _) => {
            std::fs::create_dir_all(dir)?;
            let ext = match a.format {
                FormatArg::Edges => "txt",
                FormatArg::Mtx => "mtx",
            };
            for (i, g) in graphs.iter().enumerate() {
                std::fs::write(dir.join(format!("sample_{i:04}.{ext}")), render(g))?;
            }
        }
    }
    Ok(())
}

fn spectrum(a: SpectrumArgs, params: &Parameters) -> Result<(), Failure> {
    let opts = SpectralOptions {
        tol: a.tol.unwrap_or(params.tol),
        restarts: params.restarts,
        max_iter: params.max_iter,
        seed: a.seed.unwrap_or(0),
    };
    let s = match read_graph(&a.graph)? {
        Graph::Directed(g) => s2_digraph(&g, &opts)?,
        Graph::Undirected(g) => lambda_extreme(&g, &opts)?,
    };
    print_json(&json!({
        "s1": s.s1,
        "s2": s.s2,
        "lambda_extreme": s.lambda_extreme,
        "converged": s.converged,
        "iterations": s.iterations,
    }))
}

fn pstats(a: PstatsArgs, params: &Parameters) -> Result<(), Failure> {
    let g = read_graph(&a.graph)?.to_digraph();
    let c0 = a.c0.or(params.c0.first().copied()).unwrap_or(0.001);
    let stride = a.stride.or(params.stride).unwrap_or_else(|| default_stride(g.n()));
    let scan = ep_scan(&g, c0, stride)?;
    print_json(&json!({
        "n": g.n(),
        "d": g.regular_degree(),
        "c0": c0,
        "stride": stride,
        "statistic": scan.statistic,
    }))
}

fn parse_interval(spec: &str, n: usize) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Usage(format!("interval `{spec}` is not `start:len`"));
    let (start, len) = spec.split_once(':').ok_or_else(bad)?;
    let start = start.trim().parse().map_err(|_| bad())?;
    let len = len.trim().parse().map_err(|_| bad())?;
    Ok(Interval::new(start, len, n)?.indices().collect())
}

fn codegree(a: CodegreeArgs) -> Result<(), Failure> {
    let g = read_graph(&a.graph)?.to_digraph();
    let set = match &a.interval {
        Some(s) => parse_interval(s, g.n())?,
        None => Vec::new(),
    };
    print_json(&json!({
        "n": g.n(),
        "d": g.regular_degree(),
        "codegree_max": codegree_max(&g, &set)?,
    }))
}

fn heavy(a: HeavyArgs, params: &Parameters) -> Result<(), Failure> {
    let g = read_graph(&a.graph)?.to_digraph();
    let d = g
        .regular_degree()
        .ok_or_else(|| Failure::Usage("heavy-bound needs a regular graph".into()))?;
    let (k1, k2) = (a.k1.unwrap_or(params.k1), a.k2.unwrap_or(params.k2));
    let mut rng = rng_from_seed(mix_seed(a.seed, 0));
    let (x, y) = sample_unit_pair(g.n(), &mut rng)?;
    let cert = heavy_certificate(&g, &x, &y, k1, k2, d as f64)?;
    let mut record = serde_json::to_value(&cert)?;
    if let Some(obj) = record.as_object_mut() {
        obj.insert("n".into(), json!(g.n()));
        obj.insert("d".into(), json!(d));
        obj.insert("seed".into(), json!(a.seed));
        obj.insert("k1".into(), json!(k1));
        obj.insert("k2".into(), json!(k2));
    }
    print_json(&record)
}

fn parse_cell(spec: &str) -> Result<GridCell, Failure> {
    let bad = || Failure::Usage(format!("cell `{spec}` is not `n,d[,model]`"));
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let (n, d) = match parts.as_slice() {
        [n, d] | [n, d, _] => (n.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?),
        _ => return Err(bad()),
    };
    let model = match parts.get(2) {
        None | Some(&"directed") => Model::Directed,
        Some(&"undirected") => Model::Undirected,
        Some(_) => return Err(bad()),
    };
    Ok(GridCell { n, d, model })
}

fn verify(a: VerifyArgs, text: Option<&str>) -> Result<(), Failure> {
    let mut cfg = match (text, a.experiment) {
        (Some(t), experiment) => {
            let mut cfg = ExperimentConfig::from_toml(t)?;
            if let Some(e) = experiment {
                cfg.experiment = e;
            }
            cfg
        }
        (None, Some(e)) => ExperimentConfig::new(e, Vec::new(), 1, 0),
        (None, None) => return Err(Failure::Usage("verify needs an experiment or --config".into())),
    };
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.base_seed {
        cfg.base_seed = s;
    }
    if !a.cells.is_empty() {
        cfg.grid = a.cells.iter().map(|c| parse_cell(c)).collect::<Result<_, _>>()?;
    }
    if let Some(s) = a.samples_per_chain {
        cfg.parameters.samples_per_chain = s;
    }
    if a.allow_outside_regime {
        cfg.parameters.allow_outside_regime = true;
    }
    if a.output.is_some() {
        cfg.output_path = a.output.clone();
    }
    let report = harness::run(&cfg)?;
    match &cfg.output_path {
        Some(path) if a.json => std::fs::write(path, report.to_json()?)?,
        Some(path) => report.write_csv(BufWriter::new(File::create(path)?), a.timing)?,
        None if a.json => writeln!(io::stdout().lock(), "{}", report.to_json()?)?,
        None => report.write_csv(io::stdout().lock(), a.timing)?,
    }
    if let Some(script) = &a.plot {
        let csv = cfg
            .output_path
            .as_deref()
            .filter(|_| !a.json)
            .ok_or_else(|| Failure::Usage("--plot needs a CSV --output".into()))?;
        std::fs::write(script, report.gnuplot_script(Path::new(csv)))?;
    }
    let mut err = io::stderr().lock();
    for s in &report.skipped {
        writeln!(err, "skipped: {s}")?;
    }
    for e in &report.summary {
        writeln!(err, "{} = {:?}", e.key, e.value)?;
    }
    for check in &report.assertions {
        let tag = if check.passed { "ok" } else { "FAILED" };
        writeln!(err, "[{tag}] {}: {}", check.name, check.detail)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Assertion)
    }
}
