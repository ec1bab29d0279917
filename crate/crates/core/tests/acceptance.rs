//! Acceptance gate. Prints one line per criterion and exits non-zero if any fails.
//!
//! The 512x2048 benchmark cell is slow and runs only with `--include-ignored`
//! (or `--ignored`), or when `WL1_SLOW=1`.

use std::panic;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use wl1::bench::{self, Cell, ExperimentGrid, SchemeKind, SizeSpec};
use wl1::certificates::{
    ak_bound_table, check_nsp, check_wnsp, compute_ric, compute_roc, compute_t0, gamma_interval, l1_min_exact,
    nsp_holds_at_scale, order_k_bound_table, recovery_trial, RicBudget, DEFAULT_ENUMERATION_CAP,
};
use wl1::linops::{self, DenseMatrix};
use wl1::solver::{self, SolverConfig, WeightScheme};

#[derive(Default)]
struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        self.lines.push((ok, msg.into()));
    }

    fn passed(&self) -> bool {
        self.lines.iter().all(|(ok, _)| *ok)
    }
}

type Criterion = fn() -> wl1::Result<Report>;

fn fixture(name: &str) -> DenseMatrix {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    DenseMatrix::read_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn fixture_vector(name: &str) -> Vec<f64> {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    linops::read_vector(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Entries i.i.d. `N(0, 1/m)`.
fn gaussian(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DenseMatrix {
    let scale = 1.0 / (m as f64).sqrt();
    let data = (0..m * n).map(|_| scale * Distribution::<f64>::sample(&StandardNormal, &mut *rng)).collect();
    DenseMatrix::new(m, n, data).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    linops::norm_inf(&linops::sub(a, b))
}

fn exact_ric_regression() -> wl1::Result<Report> {
    let mut r = Report::default();
    for (name, expected) in [("example1_phi.txt", 0.9224), ("example2_phi.txt", 0.9572)] {
        let phi = fixture(name);
        let start = Instant::now();
        let ric = compute_ric(&phi, 2, DEFAULT_ENUMERATION_CAP)?;
        let took = start.elapsed();
        r.check(
            (ric.value - expected).abs() <= 5e-5,
            format!("{name}: delta_2 = {:.6} on {:?} (expected {expected} +/- 5e-5)", ric.value, ric.attained_at.one_based()),
        );
        r.check(took < Duration::from_secs(1), format!("{name}: {:.3} s (limit 1 s)", took.as_secs_f64()));
    }
    Ok(r)
}

fn ak_table() -> wl1::Result<Report> {
    let mut r = Report::default();
    let s2 = 2f64.sqrt();
    let expected: [(f64, [f64; 3], f64); 4] = [
        (1.0, [s2 / 2.0, 6f64.sqrt() / 3.0, 3f64.sqrt() / 2.0], 1e-12),
        (0.75, [0.800, 0.883, 0.917], 1e-3),
        (0.5, [0.894, 0.942, 0.960], 1e-3),
        (0.25, [0.970, 0.984, 0.989], 1e-3),
    ];
    let table = ak_bound_table();
    for ((gamma, want, tol), row) in expected.iter().zip(&table) {
        r.check(row.gamma == *gamma, format!("row gamma {} (expected {gamma})", row.gamma));
        for (a, (got, w)) in [2, 3, 4].iter().zip(row.bounds.iter().zip(want)) {
            r.check((got - w).abs() <= *tol, format!("gamma {gamma}, delta_{a}k: {got:.6} vs {w:.6} (tol {tol:e})"));
        }
    }
    r.check(table.len() == 4, format!("{} rows", table.len()));
    Ok(r)
}

fn order_k_table() -> wl1::Result<Report> {
    let mut r = Report::default();
    let s6 = 6f64.sqrt();
    // (gamma, even value, even tol, odd value, odd tol), range entries read as infima
    let expected: [(f64, f64, f64, f64, f64); 5] = [
        (1.0, 1.0 / 3.0, 1e-12, 0.3203, 1e-4),
        (0.75, 3.0 / 8.0, 1e-12, 0.3797, 1e-4),
        (0.5, 0.5, 1e-12, s6 - 2.0, 1e-12),
        (0.25, 2.0 / 3.0, 1e-12, 3.0 - s6, 1e-12),
        (1.0 / 6.0, 0.75, 1e-12, 0.7101, 1e-4),
    ];
    let table = order_k_bound_table();
    for ((gamma, even, even_tol, odd, odd_tol), row) in expected.iter().zip(&table) {
        for (name, got, want, tol) in [("even", &row.even, even, even_tol), ("odd", &row.odd, odd, odd_tol)] {
            r.check(
                (got.infimum - want).abs() <= *tol,
                format!(
                    "gamma {gamma:.4} {name} k>={}: infimum {:.6} at k={} vs {want:.6} (tol {tol:e})",
                    got.k_min, got.infimum, got.argmin_k
                ),
            );
        }
    }
    Ok(r)
}

type LpCase<'a> = (&'a str, &'a DenseMatrix, &'a [f64], Vec<f64>, Vec<f64>);

fn lp_oracle() -> wl1::Result<Report> {
    let mut r = Report::default();
    let (p1, b1) = (fixture("example1_phi.txt"), fixture_vector("example1_b.txt"));
    let (p2, b2) = (fixture("example2_phi.txt"), fixture_vector("example2_b.txt"));
    let cases: [LpCase; 4] = [
        ("example 1, unweighted", &p1, &b1, vec![1.0; 3], vec![0.75, 0.75, 0.0]),
        ("example 1, w=(1,1,0.7)", &p1, &b1, vec![1.0, 1.0, 0.7], vec![0.0, 0.0, 2.0]),
        ("example 2, unweighted", &p2, &b2, vec![1.0; 5], vec![1.0 / 3.0, -0.5, 0.0, 0.0, 0.0]),
        ("example 2, w=(1,2/3,1,1/2,1)", &p2, &b2, vec![1.0, 2.0 / 3.0, 1.0, 0.5, 1.0], vec![0.0, 0.0, 0.0, 1.0, 0.0]),
    ];
    for (name, phi, b, w, want) in cases {
        let x = l1_min_exact(phi, b, &w)?;
        let err = max_abs_diff(&x, &want);
        r.check(err <= 1e-8, format!("{name}: max error {err:.2e} (tol 1e-8)"));
    }
    Ok(r)
}

fn certificate_regression() -> wl1::Result<Report> {
    let mut r = Report::default();
    let p1 = fixture("example1_phi.txt");
    let nsp = check_nsp(&p1, 1)?;
    r.check(!nsp.holds, format!("example 1: NSP holds = {}", nsp.holds));
    r.check(
        (nsp.worst_mass() - 4.0 / 7.0).abs() <= 1e-9,
        format!("example 1: witness mass {:.12} (expected 4/7)", nsp.worst_mass()),
    );
    let t0 = compute_t0(&p1, 1)?;
    r.check(t0.t0.one_based() == [3], format!("example 1: T0 = {:?} (1-based, expected [3])", t0.t0.one_based()));
    r.check((t0.value - 4.0 / 7.0).abs() <= 1e-9, format!("example 1: T0 value {:.12}", t0.value));
    let g = gamma_interval(&p1, 1, Some(RicBudget { a: 2.0, delta: 0.9224 }))?;
    r.check(
        (g.lo - 0.375).abs() <= 1e-9 && (g.hi_wnsp - 0.75).abs() <= 1e-9,
        format!("example 1: gamma interval ({:.12}, {:.12})", g.lo, g.hi_wnsp),
    );
    let hi = g.hi_ric.unwrap_or(f64::NAN);
    r.check((hi - 0.4187).abs() <= 1e-3, format!("example 1: RIC-route upper {hi:.6} (expected 0.4187 +/- 1e-3)"));

    let p2 = fixture("example2_phi.txt");
    let t0 = compute_t0(&p2, 1)?;
    r.check(t0.t0.one_based() == [4], format!("example 2: T0 = {:?} (1-based, expected [4])", t0.t0.one_based()));
    r.check((t0.value - 6.0 / 11.0).abs() <= 1e-9, format!("example 2: T0 value {:.12} (expected 6/11)", t0.value));
    let g = gamma_interval(&p2, 1, Some(RicBudget { a: 2.0, delta: 0.9572 }))?;
    let hi = g.hi_ric.unwrap_or(f64::NAN);
    r.check(0.3 < hi, format!("example 2: gamma 0.3 below RIC-route upper {hi:.6}"));
    Ok(r)
}

fn weighted_recovery_equivalence() -> wl1::Result<Report> {
    let mut r = Report::default();
    let (mut holds, mut fails, mut bad_forward, mut worst_gap) = (0, 0, 0, f64::INFINITY);
    for seed in 0..25u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0006 ^ seed);
        let phi = gaussian(&mut rng, 6, 10);
        let random_w: Vec<f64> = (0..10).map(|_| rng.random_range(0.1..=1.0)).collect();
        for k in [1, 2] {
            let mut weight_sets = vec![vec![1.0; 10], random_w.clone()];
            let t0 = compute_t0(&phi, k)?;
            let g = gamma_interval(&phi, k, None)?;
            let gamma = if g.feasible { 0.5 * (g.lo + g.hi_wnsp.min(1.0)) } else { 0.5 };
            let mut down = vec![1.0; 10];
            for i in t0.t0.iter() {
                down[i] = gamma;
            }
            weight_sets.push(down);
            for w in &weight_sets {
                let rep = check_wnsp(&phi, w, k)?;
                if rep.holds {
                    holds += 1;
                    let rate = recovery_trial(&phi, w, k, 100, seed * 31 + k as u64)?;
                    if rate != 1.0 {
                        bad_forward += 1;
                    }
                } else {
                    fails += 1;
                    let wit = rep.witness.expect("failing verdict carries a witness");
                    let mut xhat = vec![0.0; 10];
                    for i in wit.set.iter() {
                        xhat[i] = wit.vertex[i];
                    }
                    let other = linops::sub(&xhat, &wit.vertex);
                    let weighted = |x: &[f64]| x.iter().zip(w).map(|(a, b)| a.abs() * b).sum::<f64>();
                    worst_gap = worst_gap.min(weighted(&xhat) - weighted(&other));
                }
            }
        }
    }
    r.check(bad_forward == 0, format!("WNSP holds in {holds} cases; {bad_forward} fell short of 100/100 recoveries"));
    r.check(
        fails == 0 || worst_gap >= -1e-10,
        format!("WNSP fails in {fails} cases; worst objective gap of x - v against x {worst_gap:.3e} (>= -1e-10)"),
    );
    r.check(holds > 0 && fails > 0, format!("both verdicts exercised ({holds} hold, {fails} fail)"));
    Ok(r)
}

fn orthogonality_constant_inequalities() -> wl1::Result<Report> {
    let mut r = Report::default();
    let (mut even_margin, mut odd_margin, mut split_margin) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0007 ^ seed);
        let phi = gaussian(&mut rng, 6, 12);
        let d2 = compute_ric(&phi, 2, DEFAULT_ENUMERATION_CAP)?.value;
        let d3 = compute_ric(&phi, 3, DEFAULT_ENUMERATION_CAP)?.value;
        let t22 = compute_roc(&phi, 2, 2, DEFAULT_ENUMERATION_CAP)?.value;
        let t33 = compute_roc(&phi, 3, 3, DEFAULT_ENUMERATION_CAP)?.value;
        let t11 = compute_roc(&phi, 1, 1, DEFAULT_ENUMERATION_CAP)?.value;
        let t12 = compute_roc(&phi, 1, 2, DEFAULT_ENUMERATION_CAP)?.value;
        even_margin = even_margin.min(2.0 * d2 - t22);
        odd_margin = odd_margin.min(6.0 / 8f64.sqrt() * d3 - t33);
        split_margin = split_margin.min(2f64.sqrt() * t11 + 1e-10 - t12);
    }
    r.check(even_margin > 0.0, format!("min over 20 matrices of 2 delta_2 - theta_2,2 = {even_margin:.6} (> 0)"));
    r.check(odd_margin > 0.0, format!("min of (6/sqrt 8) delta_3 - theta_3,3 = {odd_margin:.6} (> 0)"));
    r.check(split_margin >= 0.0, format!("min of sqrt2 theta_1,1 + 1e-10 - theta_1,2 = {split_margin:.6} (>= 0)"));
    Ok(r)
}

fn solver_matches_oracle() -> wl1::Result<Report> {
    let mut r = Report::default();
    // stages run to their stopping rule; the default cap truncates ill-conditioned instances
    let config = SolverConfig { track_objective: true, inner_cap: 100_000, ..SolverConfig::default() };
    let (mut accepted, mut skipped, mut worst_err, mut worst_rise) = (0, 0, 0.0f64, f64::NEG_INFINITY);
    let mut capped = 0;
    let mut seed = 0u64;
    while accepted < 50 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0008 ^ seed);
        seed += 1;
        let phi = gaussian(&mut rng, 10, 30);
        let mut x = vec![0.0; 30];
        for i in rand::seq::index::sample(&mut rng, 30, 2) {
            x[i] = StandardNormal.sample(&mut rng);
        }
        let b = phi.matvec(&x)?;
        let lp = l1_min_exact(&phi, &b, &[1.0; 30])?;
        // uniqueness probe: a generic small reweighting must not move the minimizer
        let jitter: Vec<f64> = (0..30).map(|_| 1.0 + 1e-4 * rng.random_range(-1.0..1.0)).collect();
        if max_abs_diff(&lp, &l1_min_exact(&phi, &b, &jitter)?) > 1e-7 {
            skipped += 1;
            continue;
        }
        accepted += 1;
        let rep = solver::solve(&phi, &b, &WeightScheme::Identity, &config)?;
        worst_err = worst_err.max(max_abs_diff(&rep.x, &lp));
        if !rep.converged() {
            capped += 1;
        }
        for stage in &rep.stages {
            for w in stage.objective_trace.windows(2) {
                worst_rise = worst_rise.max(w[1] - w[0]);
            }
        }
    }
    r.check(
        worst_err <= 1e-3,
        format!(
            "50 instances ({skipped} non-unique skipped, {capped} hit the {} inner cap): worst max error {worst_err:.2e} (tol 1e-3)",
            config.inner_cap
        ),
    );
    r.check(worst_rise <= 1e-12, format!("largest inner-iteration objective increase {worst_rise:.2e} (slack 1e-12)"));
    Ok(r)
}

fn run_cell(m: usize, n: usize, k: usize, samples: usize) -> wl1::Result<(Vec<bench::TrialResult>, Duration)> {
    let grid = ExperimentGrid {
        specs: vec![SizeSpec { m, n, k, noise_sigma: 0.0 }],
        cells: vec![Cell { scheme: SchemeKind::Mirl1, q: 0.5, eps: bench::DEFAULT_EPS }],
        samples,
        base_seed: 2014,
        solver: SolverConfig::default(),
    };
    let start = Instant::now();
    let results = bench::run_experiment(&grid, &grid.solver, None)?;
    Ok((results, start.elapsed()))
}

fn scaled_benchmark_cell() -> wl1::Result<Report> {
    let mut r = Report::default();
    let (results, took) = run_cell(128, 512, 20, 10)?;
    let exact = results.iter().filter(|t| t.sparsity == 20).count();
    let mean_err = results.iter().map(|t| t.err2).sum::<f64>() / results.len() as f64;
    let sparsities: Vec<usize> = results.iter().map(|t| t.sparsity).collect();
    r.check(exact >= 9, format!("recovered sparsity exactly 20 in {exact}/10 samples (need 9); sparsities {sparsities:?}"));
    r.check(mean_err <= 1e-3, format!("mean l2 error {mean_err:.3e} (tol 1e-3)"));
    r.check(took < Duration::from_secs(120), format!("runtime {:.1} s (limit 120 s)", took.as_secs_f64()));
    Ok(r)
}

fn full_benchmark_cell() -> wl1::Result<Report> {
    let mut r = Report::default();
    let (results, _) = run_cell(512, 2048, 85, 10)?;
    let exact = results.iter().filter(|t| t.sparsity == 85).count();
    let mean_res = results.iter().map(|t| t.residual).sum::<f64>() / results.len() as f64;
    r.check(exact >= 9, format!("recovered sparsity exactly 85 in {exact}/10 samples (need 9)"));
    r.check(
        (7e-5..=7e-3).contains(&mean_res),
        format!("mean residual {mean_res:.3e} (within one order of magnitude of 7e-4)"),
    );
    Ok(r)
}

fn nsp_scale_invariance() -> wl1::Result<Report> {
    let mut r = Report::default();
    for name in ["example1_phi.txt", "example2_phi.txt", "identity3.txt"] {
        let phi = fixture(name);
        for k in 1..phi.cols() {
            let base = check_nsp(&phi, k)?.holds;
            for scale in [0.5, 2.0] {
                let scaled = nsp_holds_at_scale(&phi, k, scale)?;
                r.check(scaled == base, format!("{name} k={k} scale {scale}: {scaled} vs unit-section verdict {base}"));
            }
        }
    }
    Ok(r)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let slow = args.iter().any(|a| a == "--ignored" || a == "--include-ignored")
        || std::env::var("WL1_SLOW").is_ok_and(|v| v == "1");
    // `cargo test -- --list` and filters from other targets must not run the suite
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }

    let mut criteria: Vec<(&str, &str, Criterion)> = vec![
        ("1", "exact RIC of the example matrices", exact_ric_regression),
        ("2", "delta_ak bound table", ak_table),
        ("3", "delta_k bound table (infima over k-ranges)", order_k_table),
        ("4", "LP oracle on the example systems", lp_oracle),
        ("5", "certificates of the example matrices", certificate_regression),
        ("6", "WNSP iff weighted recovery on random 6x10", weighted_recovery_equivalence),
        ("7", "orthogonality constant inequalities on random 6x12", orthogonality_constant_inequalities),
        ("8", "identity solver against LP oracle on random 10x30", solver_matches_oracle),
        ("9", "scaled benchmark cell 128x512, k=20", scaled_benchmark_cell),
        ("10", "NSP verdict invariant under section rescaling", nsp_scale_invariance),
    ];
    if slow {
        criteria.push(("9b", "full benchmark cell 512x2048, k=85", full_benchmark_cell));
    }

    let mut failed = Vec::new();
    for (id, title, run) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(run);
        let secs = start.elapsed().as_secs_f64();
        let (ok, lines) = match outcome {
            Ok(Ok(report)) => (report.passed(), report.lines),
            Ok(Err(e)) => (false, vec![(false, format!("error: {e}"))]),
            Err(_) => (false, vec![(false, "panicked".to_string())]),
        };
        println!("criterion {id:>2} {}: {title} ({secs:.2} s)", if ok { "PASS" } else { "FAIL" });
        for (line_ok, msg) in lines {
            println!("      {} {msg}", if line_ok { "ok  " } else { "FAIL" });
        }
        if !ok {
            failed.push(id);
        }
    }
    if !slow {
        println!("criterion 9b skipped: full benchmark cell (run with --include-ignored)");
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
