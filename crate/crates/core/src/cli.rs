//! Command-line front end. Exit codes: 0 success, 1 input error,
//! 2 solver non-convergence, 3 enumeration refusal.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{self, ExperimentGrid, OutputFormat};
use crate::certificates::{self, GammaInterval, NspReport, RicBudget, T0Report, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::linops::{self, DenseMatrix, IndexSet};
use crate::solver::{self, SolverConfig, WeightScheme};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wl1", version, about = "Weighted l1 recovery: solver, certificates, bounds and benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve min ‖ω∘x‖₁ s.t. Φx = b by reweighted proximal continuation.
    Solve(SolveArgs),
    /// NSP/WNSP verdicts, the T0 set and the admissible down-weight interval.
    Certify(CertifyArgs),
    /// Exact restricted isometry (and orthogonality) constants.
    Ric(RicArgs),
    /// Regenerate the RIC bound tables.
    Tables(TablesArgs),
    /// Run a seeded experiment grid.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Identity,
    Classic,
    Mirl1,
    Fixed,
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    /// Comma-separated weights, e.g. `1,1,0.7`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "weights_file")]
    pub weights: Option<String>,
    /// Weights as a single-column matrix file.
    #[arg(long)]
    pub weights_file: Option<PathBuf>,
}

impl WeightArgs {
    fn load(&self) -> Result<Option<Vec<f64>>> {
        match (&self.weights, &self.weights_file) {
            (Some(s), _) => parse_list(s).map(Some),
            (None, Some(p)) => linops::read_vector(p).map(Some),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub matrix: PathBuf,
    pub vector: PathBuf,
    #[arg(long, value_enum, default_value_t = SchemeArg::Mirl1)]
    pub scheme: SchemeArg,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[arg(long, default_value_t = bench::DEFAULT_EPS)]
    pub eps: f64,
    /// Continuation stages.
    #[arg(long)]
    pub stages: Option<usize>,
    /// Inner iteration cap per stage.
    #[arg(long)]
    pub inner_cap: Option<usize>,
    /// Write the full report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the report as JSON instead of a summary.
    #[arg(long)]
    pub json: bool,
    /// Per-stage diagnostics.
    #[arg(short, long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    pub matrix: PathBuf,
    pub k: usize,
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Check the RIC route at order a·k, computing δ_{ak} exactly.
    #[arg(long)]
    pub ric_budget: Option<f64>,
    /// Use this δ_{ak} instead of computing it.
    #[arg(long, requires = "ric_budget")]
    pub delta: Option<f64>,
    /// Monte Carlo recovery trials with the LP oracle.
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u128,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RicArgs {
    pub matrix: PathBuf,
    pub k: usize,
    /// Also compute θ_{k1,k2}.
    #[arg(long, num_args = 2, value_names = ["K1", "K2"])]
    pub roc: Option<Vec<usize>>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u128,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// CSV on stdout instead of aligned text.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// TOML grid: `samples`, `base_seed`, `[[specs]]`, `[[cells]]`, `[solver]`.
    pub grid: PathBuf,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Override the grid's base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Raw per-trial output.
    #[arg(long, default_value = "results.csv")]
    pub out: PathBuf,
    /// Per-cell summary; defaults to `<out>_summary.<ext>`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, value_parser = parse_format, default_value = "csv")]
    pub format: OutputFormat,
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Comma-separated decimals.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidArgument(format!("bad number `{t}` in list")))
        })
        .collect()
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::EnumerationCap { .. } => EXIT_REFUSED,
        _ => EXIT_INPUT,
    }
}

/// Parses `args`, runs, and returns the process exit code. Diagnostics go to `err`.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Certify(a) => cmd_certify(a, out),
        Command::Ric(a) => cmd_ric(a, out),
        Command::Tables(a) => cmd_tables(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    }
}

fn load_matrix(p: &Path) -> Result<DenseMatrix> {
    DenseMatrix::read_file(p).map_err(|e| with_path(e, p))
}

fn with_path(e: Error, p: &Path) -> Error {
    match e {
        Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", p.display()) },
        other => other,
    }
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ")
}

fn fmt_set(s: &IndexSet) -> String {
    let idx: Vec<String> = s.one_based().iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", idx.join(","))
}

fn json_line<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Internal(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

pub fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let phi = load_matrix(&a.matrix)?;
    let b = linops::read_vector(&a.vector).map_err(|e| with_path(e, &a.vector))?;
    let weights = a.weights.load()?;
    let scheme = match a.scheme {
        SchemeArg::Identity => WeightScheme::Identity,
        SchemeArg::Classic => WeightScheme::Classic { q: a.q, eps: a.eps },
        SchemeArg::Mirl1 => WeightScheme::NullspaceGuided { q: a.q, eps: a.eps },
        SchemeArg::Fixed => WeightScheme::Fixed {
            weights: weights.ok_or_else(|| Error::InvalidArgument("--scheme fixed needs --weights".into()))?,
        },
    };
    let mut config = SolverConfig::default();
    if let Some(s) = a.stages {
        config.stages = s;
    }
    if let Some(c) = a.inner_cap {
        config.inner_cap = c;
    }
    let report = solver::solve(&phi, &b, &scheme, &config)?;
    if let Some(p) = &a.out {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Internal(e.to_string()))?;
        std::fs::write(p, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    }
    if a.json {
        json_line(out, &report)?;
    } else {
        let residual = linops::norm2(&linops::sub(&phi.matvec(&report.x)?, &b));
        if a.verbose {
            for s in &report.stages {
                writeln!(
                    out,
                    "stage {}: mu {:.3e}, {} iterations, step {:.3e}, support {}{}",
                    s.stage,
                    s.mu,
                    s.iterations,
                    s.final_step_norm,
                    s.support_size,
                    if s.converged { "" } else { " (cap reached)" }
                )?;
            }
        }
        writeln!(out, "scheme: {}", report.scheme.label())?;
        writeln!(out, "x: {}", fmt_vec(&report.x))?;
        writeln!(out, "sparsity: {}", report.support_size())?;
        writeln!(out, "residual: {residual:.6e}")?;
        writeln!(out, "converged: {}", report.converged())?;
    }
    Ok(if report.converged() { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

#[derive(Serialize)]
struct CertifyReport {
    nsp: NspReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    wnsp: Option<NspReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t0: Option<T0Report>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<GammaInterval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ric_budget: Option<BudgetReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recovery: Option<certificates::RecoveryOutcome>,
}

#[derive(Serialize)]
struct BudgetReport {
    a: f64,
    order: usize,
    delta: f64,
}

fn verdict_line(name: &str, r: &NspReport) -> String {
    let mut s = format!("{name}(k={}): ", r.order);
    if r.vacuous {
        s.push_str("holds vacuously (trivial kernel)");
    } else if r.holds {
        let _ = write!(s, "HOLDS (worst mass {:.6})", r.worst_mass());
    } else {
        let _ = write!(s, "FAIL (mass {:.6}", r.worst_mass());
        if let Some(w) = &r.witness {
            let _ = write!(s, " on {}", fmt_set(&w.set));
        }
        s.push(')');
    }
    s
}

pub fn cmd_certify(a: &CertifyArgs, out: &mut dyn Write) -> Result<i32> {
    let phi = load_matrix(&a.matrix)?;
    let weights = a.weights.load()?;
    let nsp = certificates::check_nsp(&phi, a.k)?;
    let wnsp = weights.as_ref().map(|w| certificates::check_wnsp(&phi, w, a.k)).transpose()?;
    let budget = match a.ric_budget {
        None => None,
        Some(ak) => {
            let prod = ak * a.k as f64;
            if !(ak > 1.0) || (prod - prod.round()).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("--ric-budget {ak} must exceed 1 and make a·k an integer")));
            }
            let order = prod.round() as usize;
            let delta = match a.delta {
                Some(d) => d,
                None => certificates::compute_ric(&phi, order, a.cap)?.value,
            };
            Some(BudgetReport { a: ak, order, delta })
        }
    };
    let (t0, gamma) = if nsp.vacuous {
        (None, None)
    } else {
        let t0 = certificates::compute_t0(&phi, a.k)?;
        let g = certificates::gamma_interval_from(&t0, budget.as_ref().map(|b| RicBudget { a: b.a, delta: b.delta }))?;
        (Some(t0), Some(g))
    };
    let recovery = if a.trials > 0 {
        let w = weights.clone().unwrap_or_else(|| vec![1.0; phi.cols()]);
        let policy = certificates::SupportPolicy::Random(a.k);
        Some(certificates::recovery_trials(&phi, &w, &policy, a.trials, a.seed)?)
    } else {
        None
    };
    let report = CertifyReport { nsp, wnsp, t0, gamma, ric_budget: budget, recovery };
    if a.json {
        json_line(out, &report)?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "{}", verdict_line("NSP", &report.nsp))?;
    if let Some(w) = &report.wnsp {
        writeln!(out, "{}", verdict_line("WNSP", w))?;
    }
    if let Some(t) = &report.t0 {
        writeln!(
            out,
            "T0: {} value {:.6} ({}, second {:.6})",
            fmt_set(&t.t0),
            t.value,
            if t.unique { "unique" } else { "not unique" },
            t.second_value
        )?;
        writeln!(out, "hhat: {}", fmt_vec(&t.hhat))?;
    }
    if let Some(g) = &report.gamma {
        writeln!(
            out,
            "gamma: ({:.6}, {:.6}){}",
            g.lo,
            g.hi_wnsp.min(1.0),
            if g.feasible { "" } else { " empty" }
        )?;
        if let (Some(hi), Some(b)) = (g.hi_ric, &report.ric_budget) {
            writeln!(out, "gamma RIC route: delta_{} = {:.6}, gamma < {:.6}", b.order, b.delta, hi)?;
        }
    }
    if let Some(r) = &report.recovery {
        writeln!(out, "recovery: {}/{} trials", r.successes, r.trials)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RicOutput {
    ric: certificates::RicValue,
    #[serde(skip_serializing_if = "Option::is_none")]
    roc: Option<certificates::RocValue>,
}

pub fn cmd_ric(a: &RicArgs, out: &mut dyn Write) -> Result<i32> {
    let phi = load_matrix(&a.matrix)?;
    let ric = certificates::compute_ric(&phi, a.k, a.cap)?;
    let roc = match a.roc.as_deref() {
        Some([k1, k2]) => Some(certificates::compute_roc(&phi, *k1, *k2, a.cap)?),
        _ => None,
    };
    let o = RicOutput { ric, roc };
    if a.json {
        json_line(out, &o)?;
    } else {
        writeln!(out, "delta_{} = {:.6} on {}", o.ric.order, o.ric.value, fmt_set(&o.ric.attained_at))?;
        if let Some(r) = &o.roc {
            let (s1, s2) = &r.attained_at;
            writeln!(out, "theta_{},{} = {:.6} on {} {}", r.orders.0, r.orders.1, r.value, fmt_set(s1), fmt_set(s2))?;
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_tables(a: &TablesArgs, out: &mut dyn Write) -> Result<i32> {
    let t1 = certificates::ak_bound_table();
    let t2 = certificates::order_k_bound_table();
    if a.csv {
        writeln!(out, "table,gamma,column,bound,k_min,argmin_k")?;
        for r in &t1 {
            for (a, v) in [2, 3, 4].iter().zip(r.bounds) {
                writeln!(out, "ak,{},delta_{a}k,{v},,", r.gamma)?;
            }
        }
        for r in &t2 {
            for (name, x) in [("even", &r.even), ("odd", &r.odd)] {
                writeln!(out, "order_k,{},{name},{},{},{}", r.gamma, x.infimum, x.k_min, x.argmin_k)?;
                for (k, v) in &x.per_k {
                    writeln!(out, "order_k,{},{name}_k={k},{v},{},{k}", r.gamma, x.k_min)?;
                }
            }
        }
        return Ok(EXIT_OK);
    }
    writeln!(out, "Bounds on delta_ak (a = 2, 3, 4)")?;
    writeln!(out, "{:>8} {:>10} {:>10} {:>10}", "gamma", "delta_2k", "delta_3k", "delta_4k")?;
    for r in &t1 {
        writeln!(out, "{:>8.4} {:>10.4} {:>10.4} {:>10.4}", r.gamma, r.bounds[0], r.bounds[1], r.bounds[2])?;
    }
    writeln!(out)?;
    writeln!(out, "Bounds on delta_k: infimum over the k-range (attained at k), then per-k values")?;
    for r in &t2 {
        for (name, x) in [("even", &r.even), ("odd", &r.odd)] {
            let per: Vec<String> = x.per_k.iter().map(|(k, v)| format!("k={k}:{v:.4}")).collect();
            writeln!(
                out,
                "gamma {:.4} {name:>4} k>={}: {:.4} (k={})  {}",
                r.gamma,
                x.k_min,
                x.infimum,
                x.argmin_k,
                per.join(" ")
            )?;
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let mut grid = ExperimentGrid::read_file(&a.grid).map_err(|e| with_path(e, &a.grid))?;
    if let Some(s) = a.seed {
        grid.base_seed = s;
    }
    let results = bench::run_experiment(&grid, &grid.solver, a.jobs)?;
    let summary = bench::summarize(&results)?;
    bench::emit_results(&results, a.format, &a.out)?;
    let summary_path = a.summary.clone().unwrap_or_else(|| default_summary_path(&a.out));
    bench::emit_summary(&summary, a.format, &summary_path)?;
    for s in &summary {
        writeln!(
            out,
            "m={} n={} k={} sigma={} {} q={}: {} trials, support rate {:.2}, sparsity {:.2}, err2 {:.3e}, residual {:.3e}, {:.3}s",
            s.m,
            s.n,
            s.k,
            s.noise_sigma,
            s.scheme,
            s.q,
            s.trials,
            s.support_rate,
            s.sparsity.mean,
            s.err2.mean,
            s.residual.mean,
            s.seconds.mean
        )?;
    }
    writeln!(out, "wrote {} and {}", a.out.display(), summary_path.display())?;
    Ok(EXIT_OK)
}

fn default_summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "results".into());
    let ext = out.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    out.with_file_name(format!("{stem}_summary.{ext}"))
}
