//! Seeded experiment harness: random Gaussian problems, solver grids, metrics.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{self, DenseMatrix};
use crate::solver::{self, SolverConfig, WeightScheme};

/// Default `ε` in the reweighting rules.
pub const DEFAULT_EPS: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidArgument(format!("empty problem {}x{}", self.m, self.n)));
        }
        if self.k > self.n {
            return Err(Error::InvalidArgument(format!("sparsity {} exceeds n = {}", self.k, self.n)));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("noise sigma {} must be ≥ 0", self.noise_sigma)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedProblem {
    pub phi: DenseMatrix,
    pub x_orig: Vec<f64>,
    pub b: Vec<f64>,
}

/// Draws `Φ ~ N(0,1)^{m×n}`, a `k`-sparse `x_orig` with standard-normal values on
/// a random support, and `b = Φ x_orig + ξ` with `ξ ~ N(0, σ²)`.
///
/// The stream is ChaCha8 seeded from `spec.seed`, consumed in a fixed order:
/// `Φ` row by row, the support permutation, the nonzero values, then the noise.
pub fn generate_problem(spec: &ProblemSpec) -> Result<GeneratedProblem> {
    spec.validate()?;
    let ProblemSpec { m, n, k, noise_sigma, seed } = *spec;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let phi = DenseMatrix::new(m, n, data)?;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut x_orig = vec![0.0; n];
    for &i in &perm[..k] {
        let mut v: f64 = StandardNormal.sample(&mut rng);
        // a literal zero would shrink the support; measure-zero but cheap to exclude
        while v == 0.0 {
            v = StandardNormal.sample(&mut rng);
        }
        x_orig[i] = v;
    }
    let mut b = phi.matvec(&x_orig)?;
    if noise_sigma > 0.0 {
        let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for bi in b.iter_mut() {
            *bi += noise.sample(&mut rng);
        }
    }
    Ok(GeneratedProblem { phi, x_orig, b })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Il1,
    Irl1,
    Mirl1,
}

impl SchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::Il1 => "IL1",
            SchemeKind::Irl1 => "IRL1",
            SchemeKind::Mirl1 => "MIRL1",
        }
    }
}

fn default_q() -> f64 {
    1.0
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

/// One `(scheme, q)` column of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub scheme: SchemeKind,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

impl Cell {
    pub fn weight_scheme(&self) -> WeightScheme {
        match self.scheme {
            SchemeKind::Il1 => WeightScheme::Identity,
            SchemeKind::Irl1 => WeightScheme::Classic { q: self.q, eps: self.eps },
            SchemeKind::Mirl1 => WeightScheme::NullspaceGuided { q: self.q, eps: self.eps },
        }
    }
}

/// Problem sizes without seeds; seeds are derived per sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub noise_sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentGrid {
    pub specs: Vec<SizeSpec>,
    pub cells: Vec<Cell>,
    pub samples: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl ExperimentGrid {
    pub fn from_toml(text: &str) -> Result<Self> {
        let grid: ExperimentGrid = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(0);
            Error::Parse { line, msg: e.message().to_string() }
        })?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() || self.cells.is_empty() || self.samples == 0 {
            return Err(Error::InvalidArgument("grid needs at least one spec, one cell and one sample".into()));
        }
        for s in &self.specs {
            self.problem_spec(s, 0).validate()?;
        }
        for c in &self.cells {
            c.weight_scheme().validate()?;
        }
        self.solver.validate()
    }

    /// Problem for sample `sample` of `size`; every cell sees the same draw.
    pub fn problem_spec(&self, size: &SizeSpec, sample: usize) -> ProblemSpec {
        ProblemSpec {
            m: size.m,
            n: size.n,
            k: size.k,
            noise_sigma: size.noise_sigma,
            seed: trial_seed(self.base_seed, size, sample),
        }
    }
}

/// `base ⊕ H(size, sample)` with a fixed 64-bit mixing hash.
pub fn trial_seed(base: u64, size: &SizeSpec, sample: usize) -> u64 {
    let words = [size.m as u64, size.n as u64, size.k as u64, size.noise_sigma.to_bits(), sample as u64];
    let mut h = 0x243F_6A88_85A3_08D3u64;
    for w in words {
        h = mix64(h ^ w);
    }
    base ^ h
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub scheme: String,
    pub q: f64,
    pub sample: usize,
    pub sparsity: usize,
    pub residual: f64,
    pub err2: f64,
    pub errinf: f64,
    pub seconds: f64,
    pub converged: bool,
    /// Recovered nonzero pattern equals the true support. Feeds the summary
    /// rate; not part of the file schema.
    #[serde(skip)]
    pub support_exact: bool,
}

pub fn evaluate(spec: &ProblemSpec, problem: &GeneratedProblem, cell: &Cell, sample: usize, config: &SolverConfig) -> Result<TrialResult> {
    let report = solver::solve(&problem.phi, &problem.b, &cell.weight_scheme(), config)?;
    let x = &report.x;
    let residual = linops::norm2(&linops::sub(&problem.phi.matvec(x)?, &problem.b));
    let diff = linops::sub(x, &problem.x_orig);
    let support_exact = x.iter().zip(&problem.x_orig).all(|(a, b)| (*a != 0.0) == (*b != 0.0));
    Ok(TrialResult {
        m: spec.m,
        n: spec.n,
        k: spec.k,
        noise_sigma: spec.noise_sigma,
        seed: spec.seed,
        scheme: cell.scheme.label().to_string(),
        q: cell.q,
        sample,
        sparsity: report.support_size(),
        residual,
        err2: linops::norm2(&diff),
        errinf: linops::norm_inf(&diff),
        seconds: report.wall_seconds,
        converged: report.converged(),
        support_exact,
    })
}

/// Runs every `(spec, sample, cell)` trial. `jobs = None` uses all cores.
///
/// Output order is specs × samples × cells regardless of scheduling.
pub fn run_experiment(grid: &ExperimentGrid, config: &SolverConfig, jobs: Option<usize>) -> Result<Vec<TrialResult>> {
    grid.validate()?;
    config.validate()?;
    let tasks: Vec<(SizeSpec, usize)> =
        grid.specs.iter().flat_map(|s| (0..grid.samples).map(move |i| (*s, i))).collect();
    let run = || -> Result<Vec<TrialResult>> {
        let nested: Vec<Result<Vec<TrialResult>>> = tasks
            .par_iter()
            .map(|(size, sample)| {
                let spec = grid.problem_spec(size, *sample);
                let problem = generate_problem(&spec)?;
                grid.cells.iter().map(|cell| evaluate(&spec, &problem, cell, *sample, config)).collect()
            })
            .collect();
        let mut out = Vec::new();
        for r in nested {
            out.extend(r?);
        }
        Ok(out)
    };
    match jobs {
        None => run(),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?
            .install(run),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut sum, mut count, mut min, mut max) = (0.0, 0usize, f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            sum += v;
            count += 1;
            min = min.min(v);
            max = max.max(v);
        }
        Stat { mean: sum / count as f64, min, max }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub noise_sigma: f64,
    pub scheme: String,
    pub q: f64,
    pub trials: usize,
    pub sparsity: Stat,
    pub residual: Stat,
    pub err2: Stat,
    pub errinf: Stat,
    pub seconds: Stat,
    /// Fraction of trials whose nonzero pattern equals the true support.
    pub support_rate: f64,
    pub converged_rate: f64,
}

/// Per-cell statistics, cells in order of first appearance.
pub fn summarize(results: &[TrialResult]) -> Result<Vec<CellSummary>> {
    if results.is_empty() {
        return Err(Error::InvalidArgument("no results to summarize".into()));
    }
    type Key = (usize, usize, usize, u64, String, u64);
    let key = |r: &TrialResult| -> Key { (r.m, r.n, r.k, r.noise_sigma.to_bits(), r.scheme.clone(), r.q.to_bits()) };
    let mut order: Vec<Key> = Vec::new();
    let mut groups: HashMap<Key, Vec<&TrialResult>> = HashMap::new();
    for r in results {
        let k = key(r);
        groups
            .entry(k.clone())
            .or_insert_with(|| {
                order.push(k);
                Vec::new()
            })
            .push(r);
    }
    Ok(order
        .into_iter()
        .map(|k| {
            let g = &groups[&k];
            let first = g[0];
            let frac = |f: &dyn Fn(&TrialResult) -> bool| g.iter().filter(|r| f(r)).count() as f64 / g.len() as f64;
            CellSummary {
                m: first.m,
                n: first.n,
                k: first.k,
                noise_sigma: first.noise_sigma,
                scheme: first.scheme.clone(),
                q: first.q,
                trials: g.len(),
                sparsity: Stat::of(g.iter().map(|r| r.sparsity as f64)),
                residual: Stat::of(g.iter().map(|r| r.residual)),
                err2: Stat::of(g.iter().map(|r| r.err2)),
                errinf: Stat::of(g.iter().map(|r| r.errinf)),
                seconds: Stat::of(g.iter().map(|r| r.seconds)),
                support_rate: frac(&|r| r.support_exact),
                converged_rate: frac(&|r| r.converged),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 14] = [
    "m", "n", "k", "noise_sigma", "seed", "scheme", "q", "sample", "sparsity", "residual", "err2", "errinf",
    "seconds", "converged",
];

pub fn emit_results(results: &[TrialResult], format: OutputFormat, path: &Path) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
            // serde only writes a header alongside the first record
            if results.is_empty() {
                w.write_record(CSV_COLUMNS).map_err(csv_err)?;
            }
            for r in results {
                w.serialize(r).map_err(csv_err)?;
            }
            w.flush()?;
            Ok(())
        }
        OutputFormat::Json => write_json(results, path),
    }
}

pub fn read_results(format: OutputFormat, path: &Path) -> Result<Vec<TrialResult>> {
    match format {
        OutputFormat::Csv => {
            let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
            r.deserialize().map(|row| row.map_err(csv_err)).collect()
        }
        OutputFormat::Json => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
        }
    }
}

/// Flattened summary, one row per cell.
#[derive(Serialize)]
struct SummaryRow<'a> {
    m: usize,
    n: usize,
    k: usize,
    noise_sigma: f64,
    scheme: &'a str,
    q: f64,
    trials: usize,
    sparsity_mean: f64,
    sparsity_min: f64,
    sparsity_max: f64,
    residual_mean: f64,
    residual_min: f64,
    residual_max: f64,
    err2_mean: f64,
    err2_min: f64,
    err2_max: f64,
    errinf_mean: f64,
    errinf_min: f64,
    errinf_max: f64,
    seconds_mean: f64,
    seconds_min: f64,
    seconds_max: f64,
    support_rate: f64,
    converged_rate: f64,
}

pub fn emit_summary(summary: &[CellSummary], format: OutputFormat, path: &Path) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(summary, path),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
            for s in summary {
                w.serialize(SummaryRow {
                    m: s.m,
                    n: s.n,
                    k: s.k,
                    noise_sigma: s.noise_sigma,
                    scheme: &s.scheme,
                    q: s.q,
                    trials: s.trials,
                    sparsity_mean: s.sparsity.mean,
                    sparsity_min: s.sparsity.min,
                    sparsity_max: s.sparsity.max,
                    residual_mean: s.residual.mean,
                    residual_min: s.residual.min,
                    residual_max: s.residual.max,
                    err2_mean: s.err2.mean,
                    err2_min: s.err2.min,
                    err2_max: s.err2.max,
                    errinf_mean: s.errinf.mean,
                    errinf_min: s.errinf.min,
                    errinf_max: s.errinf.max,
                    seconds_mean: s.seconds.mean,
                    seconds_min: s.seconds.min,
                    seconds_max: s.seconds.max,
                    support_rate: s.support_rate,
                    converged_rate: s.converged_rate,
                })
                .map_err(csv_err)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Parse { line: p.line() as usize, msg: e.to_string() },
        None => Error::Io(e.to_string()),
    }
}
