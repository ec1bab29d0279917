//! Proximal majorization-minimization with penalty continuation.
//!
//! Each stage minimizes `½‖Φx − b‖² + μ‖ω∘x‖₁` by iterative soft-thresholding
//! with step `1/L`, warm-started from the previous stage. The weight scheme
//! decides how `ω` changes between stages:
//!
//! - `Identity`: all ones (plain iterative ℓ1, IL1).
//! - `Classic`: `ω_i = (|x_i| + ε)^{q−1}` from the last stage (IRL1).
//! - `NullspaceGuided`: down-weights the `k` coordinates where the last stage
//!   moved the most, `k` being the current support size (MIRL1).
//! - `Fixed`: a caller-supplied constant weight vector.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{self, DenseMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightScheme {
    Identity,
    Classic { q: f64, eps: f64 },
    NullspaceGuided { q: f64, eps: f64 },
    Fixed { weights: Vec<f64> },
}

impl WeightScheme {
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightScheme::Identity => Ok(()),
            WeightScheme::Classic { q, eps } => {
                if !(0.0..1.0).contains(q) {
                    return Err(Error::InvalidArgument(format!("classic scheme needs q in [0,1), got {q}")));
                }
                check_eps(*eps)
            }
            WeightScheme::NullspaceGuided { q, eps } => {
                if !(*q > 0.0 && *q <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "null-space-guided scheme needs q in (0,1], got {q}"
                    )));
                }
                check_eps(*eps)
            }
            WeightScheme::Fixed { weights } => {
                if weights.iter().any(|w| !(*w > 0.0 && *w <= 1.0)) {
                    return Err(Error::InvalidArgument("fixed weights must lie in (0,1]".into()));
                }
                Ok(())
            }
        }
    }

    /// Short label used in reports: IL1, IRL1, MIRL1 or FIXED.
    pub fn label(&self) -> &'static str {
        match self {
            WeightScheme::Identity => "IL1",
            WeightScheme::Classic { .. } => "IRL1",
            WeightScheme::NullspaceGuided { .. } => "MIRL1",
            WeightScheme::Fixed { .. } => "FIXED",
        }
    }

    pub fn q(&self) -> Option<f64> {
        match self {
            WeightScheme::Classic { q, .. } | WeightScheme::NullspaceGuided { q, .. } => Some(*q),
            _ => None,
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("ε must be positive, got {eps}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum InitialPoint {
    Ones,
    Zeros,
    Given(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Number of continuation stages.
    pub stages: usize,
    pub mu_decay: f64,
    /// Inner stopping tolerance is `eta_factor · μ`.
    pub eta_factor: f64,
    pub inner_cap: usize,
    /// Multiplier applied to the computed `λmax(ΦᵀΦ)`.
    pub l_inflation: f64,
    pub x0: InitialPoint,
    /// Record the objective after every inner iteration (diagnostics only).
    pub track_objective: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            stages: 8,
            mu_decay: 0.2,
            eta_factor: 1e-4,
            inner_cap: 5000,
            l_inflation: 1.0 + 1e-6,
            x0: InitialPoint::Ones,
            track_objective: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stages == 0 {
            return Err(Error::InvalidArgument("stage count must be at least 1".into()));
        }
        if !(self.mu_decay > 0.0 && self.mu_decay < 1.0) {
            return Err(Error::InvalidArgument("mu_decay must lie in (0,1)".into()));
        }
        if !(self.eta_factor > 0.0) {
            return Err(Error::InvalidArgument("eta_factor must be positive".into()));
        }
        if self.inner_cap == 0 {
            return Err(Error::InvalidArgument("inner_cap must be at least 1".into()));
        }
        if !(self.l_inflation >= 1.0) {
            return Err(Error::InvalidArgument("l_inflation must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageDiagnostics {
    /// 1-based stage index.
    pub stage: usize,
    pub mu: f64,
    pub iterations: usize,
    pub final_step_norm: f64,
    pub converged: bool,
    /// Number of exactly nonzero entries of the stage output.
    pub support_size: usize,
    /// Weights used during this stage.
    pub weights: Vec<f64>,
    /// Objective after each inner iteration, starting with the stage's initial point.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub scheme: WeightScheme,
    pub x: Vec<f64>,
    pub lipschitz: f64,
    pub stages: Vec<StageDiagnostics>,
    /// Objective at the end of each stage, under that stage's μ and ω.
    pub objective: Vec<f64>,
    pub wall_seconds: f64,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.stages.iter().all(|s| s.converged)
    }

    pub fn support_size(&self) -> usize {
        linops::support_size(&self.x)
    }
}

/// `sign(v)·max(|v| − t, 0)`, exact zeros where `|v_i| ≤ t_i`.
pub fn soft_threshold(v: &[f64], t: &[f64]) -> Result<Vec<f64>> {
    if v.len() != t.len() {
        return Err(Error::Dimension(format!("soft threshold: {} values, {} thresholds", v.len(), t.len())));
    }
    if t.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidArgument("thresholds must be non-negative".into()));
    }
    Ok(v.iter().zip(t).map(|(&vi, &ti)| shrink(vi, ti)).collect())
}

#[inline]
fn shrink(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// `μ^τ = decay^{τ−1}·‖Φᵀb‖∞` for `τ = 1..=stages`.
pub fn mu_schedule(phi: &DenseMatrix, b: &[f64], stages: usize, decay: f64) -> Result<Vec<f64>> {
    let top = linops::norm_inf(&phi.matvec_t(b)?);
    Ok((0..stages).map(|i| top * decay.powi(i as i32)).collect())
}

/// `½‖Φx − b‖² + μ‖ω∘x‖₁`.
pub fn objective(phi: &DenseMatrix, b: &[f64], weights: &[f64], mu: f64, x: &[f64]) -> f64 {
    let r = linops::sub(&phi.matvec_unchecked(x), b);
    0.5 * linops::dot(&r, &r) + mu * weighted_l1(weights, x)
}

fn weighted_l1(weights: &[f64], x: &[f64]) -> f64 {
    weights.iter().zip(x).map(|(w, v)| w * v.abs()).sum()
}

/// Inputs of one continuation stage.
#[derive(Clone, Copy, Debug)]
pub struct StageParams<'a> {
    pub weights: &'a [f64],
    pub mu: f64,
    pub lipschitz: f64,
    pub eta: f64,
    pub cap: usize,
    pub track_objective: bool,
}

/// Output of [`ista_stage`].
#[derive(Clone, Debug)]
pub struct StageOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub final_step_norm: f64,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
}

/// One proximal-gradient step with step size `1/L`.
pub fn prox_step(phi: &DenseMatrix, b: &[f64], weights: &[f64], mu: f64, lipschitz: f64, x: &[f64]) -> Vec<f64> {
    let r = linops::sub(&phi.matvec_unchecked(x), b);
    let g = phi.matvec_t_unchecked(&r);
    let inv_l = 1.0 / lipschitz;
    let scale = mu / lipschitz;
    x.iter()
        .zip(&g)
        .zip(weights)
        .map(|((xi, gi), wi)| shrink(xi - inv_l * gi, scale * wi))
        .collect()
}

/// Iterates [`prox_step`] until `‖x⁺ − x‖₂ < η·max{1, ‖x‖₂}` or the cap is hit.
pub fn ista_stage(phi: &DenseMatrix, b: &[f64], x_init: &[f64], p: StageParams<'_>) -> Result<StageOutcome> {
    let n = phi.cols();
    if b.len() != phi.rows() || x_init.len() != n || p.weights.len() != n {
        return Err(Error::Dimension("ista stage operand sizes".into()));
    }
    if p.weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidArgument("stage weights must be positive".into()));
    }
    if !(p.lipschitz > 0.0) || !(p.mu >= 0.0) || !(p.eta >= 0.0) || p.cap == 0 {
        return Err(Error::InvalidArgument("stage parameters out of range".into()));
    }
    let mut x = x_init.to_vec();
    let mut trace = Vec::new();
    if p.track_objective {
        trace.push(objective(phi, b, p.weights, p.mu, &x));
    }
    let mut step = f64::INFINITY;
    for it in 1..=p.cap {
        let next = prox_step(phi, b, p.weights, p.mu, p.lipschitz, &x);
        step = linops::norm2(&linops::sub(&next, &x));
        let threshold = p.eta * linops::norm2(&x).max(1.0);
        x = next;
        if p.track_objective {
            trace.push(objective(phi, b, p.weights, p.mu, &x));
        }
        if step < threshold {
            return Ok(StageOutcome { x, iterations: it, final_step_norm: step, converged: true, objective_trace: trace });
        }
    }
    Ok(StageOutcome { x, iterations: p.cap, final_step_norm: step, converged: false, objective_trace: trace })
}

/// Null-space-guided weights from the change `h = x_curr − x_prev`.
///
/// `T` holds the `k = |supp(x_curr)|` largest `|h_i|` (ties to the smaller
/// index). On `T`, `ω_i = ((|h_i| + ε)/D)^{q−1}` with `D = max_{j∉T} |h_j|`;
/// elsewhere `ω_i = 1`. `D` falls back to `ε` when `T` is everything or `D = 0`.
pub fn update_weights_nullspace(x_prev: &[f64], x_curr: &[f64], q: f64, eps: f64) -> Result<Vec<f64>> {
    if x_prev.len() != x_curr.len() {
        return Err(Error::Dimension("weight update operand lengths".into()));
    }
    WeightScheme::NullspaceGuided { q, eps }.validate()?;
    let n = x_curr.len();
    let h: Vec<f64> = x_curr.iter().zip(x_prev).map(|(c, p)| (c - p).abs()).collect();
    let k = linops::support_size(x_curr);
    let mut weights = vec![1.0; n];
    if k == 0 {
        return Ok(weights);
    }
    let top = top_k_indices(&h, k);
    let mut in_t = vec![false; n];
    for &i in &top {
        in_t[i] = true;
    }
    let mut denom = h.iter().zip(&in_t).filter(|(_, t)| !**t).fold(0.0f64, |m, (v, _)| m.max(*v));
    if denom == 0.0 {
        denom = eps;
    }
    for &i in &top {
        weights[i] = ((h[i] + eps) / denom).powf(q - 1.0);
    }
    Ok(weights)
}

/// `ω_i = (1/(|x_i| + ε))^{1−q}`. Not bounded by one.
pub fn update_weights_classic(x_curr: &[f64], q: f64, eps: f64) -> Result<Vec<f64>> {
    WeightScheme::Classic { q, eps }.validate()?;
    Ok(x_curr.iter().map(|x| (1.0 / (x.abs() + eps)).powf(1.0 - q)).collect())
}

/// Indices of the `k` largest values, ties resolved to the smaller index.
pub(crate) fn top_k_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps index order among equal magnitudes
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order.truncate(k);
    order.sort_unstable();
    order
}

/// Runs the full continuation scheme.
pub fn solve(phi: &DenseMatrix, b: &[f64], scheme: &WeightScheme, config: &SolverConfig) -> Result<SolveReport> {
    let start = Instant::now();
    let n = phi.cols();
    if b.len() != phi.rows() {
        return Err(Error::Dimension(format!(
            "observation has length {}, matrix has {} rows",
            b.len(),
            phi.rows()
        )));
    }
    scheme.validate()?;
    config.validate()?;
    if let WeightScheme::Fixed { weights } = scheme {
        if weights.len() != n {
            return Err(Error::Dimension(format!("{} weights for {n} columns", weights.len())));
        }
    }
    let mut x_prev = match &config.x0 {
        InitialPoint::Ones => vec![1.0; n],
        InitialPoint::Zeros => vec![0.0; n],
        InitialPoint::Given(v) if v.len() == n => v.clone(),
        InitialPoint::Given(v) => {
            return Err(Error::Dimension(format!("initial point has length {}, expected {n}", v.len())))
        }
    };
    let mus = mu_schedule(phi, b, config.stages, config.mu_decay)?;
    let lipschitz = config.l_inflation * linops::largest_gram_eigenvalue(phi).value;
    let mut weights = match scheme {
        WeightScheme::Fixed { weights } => weights.clone(),
        _ => vec![1.0; n],
    };

    // Φᵀb = 0 makes every stage penalty zero; the minimum-ℓ1 answer is x = 0.
    if mus[0] == 0.0 || lipschitz == 0.0 {
        let x = vec![0.0; n];
        let stages = (1..=config.stages)
            .map(|stage| StageDiagnostics {
                stage,
                mu: 0.0,
                iterations: 0,
                final_step_norm: 0.0,
                converged: true,
                support_size: 0,
                weights: weights.clone(),
                objective_trace: Vec::new(),
            })
            .collect();
        let obj = objective(phi, b, &weights, 0.0, &x);
        return Ok(SolveReport {
            scheme: scheme.clone(),
            x,
            lipschitz,
            stages,
            objective: vec![obj; config.stages],
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }

    let mut stages = Vec::with_capacity(config.stages);
    let mut objectives = Vec::with_capacity(config.stages);
    for (idx, &mu) in mus.iter().enumerate() {
        let outcome = ista_stage(
            phi,
            b,
            &x_prev,
            StageParams {
                weights: &weights,
                mu,
                lipschitz,
                eta: config.eta_factor * mu,
                cap: config.inner_cap,
                track_objective: config.track_objective,
            },
        )?;
        let x_curr = outcome.x;
        objectives.push(objective(phi, b, &weights, mu, &x_curr));
        stages.push(StageDiagnostics {
            stage: idx + 1,
            mu,
            iterations: outcome.iterations,
            final_step_norm: outcome.final_step_norm,
            converged: outcome.converged,
            support_size: linops::support_size(&x_curr),
            weights: weights.clone(),
            objective_trace: outcome.objective_trace,
        });
        match scheme {
            WeightScheme::NullspaceGuided { q, eps } => {
                weights = update_weights_nullspace(&x_prev, &x_curr, *q, *eps)?;
            }
            WeightScheme::Classic { q, eps } => {
                weights = update_weights_classic(&x_curr, *q, *eps)?;
            }
            WeightScheme::Identity | WeightScheme::Fixed { .. } => {}
        }
        x_prev = x_curr;
    }
    Ok(SolveReport {
        scheme: scheme.clone(),
        x: x_prev,
        lipschitz,
        stages,
        objective: objectives,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn example1() -> (DenseMatrix, Vec<f64>) {
        (DenseMatrix::from_rows(&[[0.8, 0.0, 0.3], [0.0, 0.8, 0.3]]).unwrap(), vec![0.6, 0.6])
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(&[3.0, -1.0], &[1.0, 2.0]).unwrap(), vec![2.0, 0.0]);
        assert_eq!(soft_threshold(&[3.0, -1.5], &[0.0, 0.0]).unwrap(), vec![3.0, -1.5]);
        let r = soft_threshold(&[0.5, -0.5], &[0.5, 0.4]).unwrap();
        assert_eq!(r[0].to_bits(), 0.0f64.to_bits());
        assert_relative_eq!(r[1], -0.1, epsilon = 1e-15);
        assert!(soft_threshold(&[1.0], &[1.0, 2.0]).is_err());
        assert!(soft_threshold(&[1.0], &[-1.0]).is_err());
    }

    #[test]
    fn mu_schedule_examples() {
        let id = DenseMatrix::identity(2);
        let mus = mu_schedule(&id, &[5.0, 0.0], 3, 0.2).unwrap();
        for (m, e) in mus.iter().zip([5.0, 1.0, 0.2]) {
            assert_relative_eq!(*m, e, epsilon = 1e-15);
        }
        assert_eq!(mu_schedule(&id, &[0.0, 0.0], 3, 0.2).unwrap(), vec![0.0; 3]);
        // Φᵀb = (0.48, 0.48, 0.36) by hand.
        let (phi, b) = example1();
        let mus = mu_schedule(&phi, &b, 2, 0.2).unwrap();
        assert_relative_eq!(mus[0], 0.48, epsilon = 1e-15);
        assert_relative_eq!(mus[1], 0.096, epsilon = 1e-15);
    }

    #[test]
    fn ista_identity_design_is_one_step() {
        let phi = DenseMatrix::identity(3);
        let b = [2.0, -0.3, 0.7];
        let w = [1.0, 1.0, 0.5];
        let out = ista_stage(
            &phi,
            &b,
            &[0.0; 3],
            StageParams { weights: &w, mu: 0.5, lipschitz: 1.0, eta: 1e-10, cap: 100, track_objective: false },
        )
        .unwrap();
        let expect = soft_threshold(&b, &[0.5, 0.5, 0.25]).unwrap();
        assert!(out.converged);
        // the first step lands on the answer; the second confirms it
        assert_eq!(out.iterations, 2);
        assert_eq!(out.x, expect);
    }

    #[test]
    fn ista_zero_penalty_solves_square_system() {
        let phi = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]).unwrap();
        let b = [1.0, 2.0];
        let l = linops::largest_gram_eigenvalue(&phi).value * (1.0 + 1e-6);
        let out = ista_stage(
            &phi,
            &b,
            &[1.0, 1.0],
            StageParams { weights: &[1.0, 1.0], mu: 0.0, lipschitz: l, eta: 1e-12, cap: 5000, track_objective: false },
        )
        .unwrap();
        let r = linops::sub(&phi.matvec(&out.x).unwrap(), &b);
        assert!(linops::norm2(&r) < 1e-6);
    }

    #[test]
    fn ista_rejects_bad_parameters() {
        let phi = DenseMatrix::identity(2);
        let p = StageParams { weights: &[1.0, 0.0], mu: 1.0, lipschitz: 1.0, eta: 1e-6, cap: 10, track_objective: false };
        assert!(ista_stage(&phi, &[1.0, 1.0], &[0.0, 0.0], p).is_err());
        let p = StageParams { weights: &[1.0, 1.0], ..p };
        assert!(ista_stage(&phi, &[1.0], &[0.0, 0.0], p).is_err());
    }

    #[test]
    fn nullspace_weights_examples() {
        let w = update_weights_nullspace(&[0.3, 0.1, -2.0], &[1.0, 0.0, 0.2], 1.0, 1e-4).unwrap();
        assert_eq!(w, vec![1.0; 3]);

        // dyadic entries so |h_0| and |h_1| tie exactly
        let w = update_weights_nullspace(&[0.75, 0.25, 0.0], &[1.0, 0.0, 0.5], 0.5, 1e-4).unwrap();
        // h = (0.25, −0.25, 0.5), k = 2, T = {0, 2}, D = |h_1|.
        assert_relative_eq!(w[0], ((0.25f64 + 1e-4) / 0.25).powf(-0.5), max_relative = 1e-12);
        assert_eq!(w[1], 1.0);
        assert_relative_eq!(w[2], ((0.5f64 + 1e-4) / 0.25).powf(-0.5), max_relative = 1e-12);

        // 1.0 − 0.9 rounds below 0.1, so index 1 outranks index 0 here
        let w = update_weights_nullspace(&[0.9, 0.1, 0.0], &[1.0, 0.0, 0.2], 0.5, 1e-4).unwrap();
        assert_eq!(w[0], 1.0);
        assert!((w[1] - 0.9995).abs() < 1e-4 && (w[2] - 0.7069).abs() < 1e-4);

        let w = update_weights_nullspace(&[0.5, 0.5], &[0.0, 0.0], 0.5, 1e-4).unwrap();
        assert_eq!(w, vec![1.0, 1.0]);
    }

    #[test]
    fn nullspace_weights_fall_back_to_eps() {
        // support covers every coordinate, so D := ε
        let w = update_weights_nullspace(&[0.0, 0.0], &[1.0, 2.0], 0.5, 1e-2).unwrap();
        assert_relative_eq!(w[0], ((1.0 + 1e-2) / 1e-2f64).powf(-0.5), max_relative = 1e-12);
        assert!(w.iter().all(|v| *v > 0.0 && *v < 1.0));
    }

    #[test]
    fn top_k_ties_prefer_smaller_index() {
        assert_eq!(top_k_indices(&[0.1, 0.1, 0.2], 2), vec![0, 2]);
        assert_eq!(top_k_indices(&[0.3, 0.3, 0.3], 1), vec![0]);
    }

    #[test]
    fn classic_weights_examples() {
        let w = update_weights_classic(&[1.0], 0.0, 1e-4).unwrap();
        assert_relative_eq!(w[0], 1.0 / 1.0001, max_relative = 1e-12);
        let w = update_weights_classic(&[0.0], 0.0, 1e-4).unwrap();
        assert_relative_eq!(w[0], 1e4, max_relative = 1e-12);
        let w = update_weights_classic(&[3.0], 0.5, 1e-4).unwrap();
        assert!((w[0] - 0.57734).abs() < 1e-5);
        assert!(update_weights_classic(&[1.0], 1.0, 1e-4).is_err());
    }

    #[test]
    fn solve_zero_observation_returns_zero() {
        let (phi, _) = example1();
        let rep = solve(&phi, &[0.0, 0.0], &WeightScheme::Identity, &SolverConfig::default()).unwrap();
        assert!(rep.x.iter().all(|v| v.abs() <= 1e-10));
        assert_eq!(rep.stages.len(), 8);
        assert!(rep.converged());
    }

    #[test]
    fn solve_example1_schemes() {
        let (phi, b) = example1();
        let cfg = SolverConfig::default();
        let rep = solve(&phi, &b, &WeightScheme::Fixed { weights: vec![1.0, 1.0, 0.7] }, &cfg).unwrap();
        assert!(linops::norm_inf(&linops::sub(&rep.x, &[0.0, 0.0, 2.0])) <= 1e-2, "{:?}", rep.x);
        let rep = solve(&phi, &b, &WeightScheme::Identity, &cfg).unwrap();
        assert!(linops::norm_inf(&linops::sub(&rep.x, &[0.75, 0.75, 0.0])) <= 1e-2, "{:?}", rep.x);
        assert_eq!(rep.stages.len(), 8);
        assert!(rep.stages.iter().all(|s| s.iterations <= cfg.inner_cap));
    }

    #[test]
    fn nullspace_guided_with_unit_exponent_is_plain_l1() {
        let (phi, b) = example1();
        let cfg = SolverConfig::default();
        let plain = solve(&phi, &b, &WeightScheme::Identity, &cfg).unwrap();
        let guided = solve(&phi, &b, &WeightScheme::NullspaceGuided { q: 1.0, eps: 1e-4 }, &cfg).unwrap();
        assert_eq!(plain.x, guided.x);
        assert!(guided.stages.iter().all(|s| s.weights.iter().all(|w| *w == 1.0)));
    }

    #[test]
    fn solve_validates_inputs() {
        let (phi, b) = example1();
        let cfg = SolverConfig::default();
        assert!(solve(&phi, &[1.0], &WeightScheme::Identity, &cfg).is_err());
        assert!(solve(&phi, &b, &WeightScheme::Fixed { weights: vec![1.0, 1.0] }, &cfg).is_err());
        assert!(solve(&phi, &b, &WeightScheme::Fixed { weights: vec![1.0, 1.0, 1.5] }, &cfg).is_err());
        assert!(solve(&phi, &b, &WeightScheme::NullspaceGuided { q: 0.0, eps: 1e-4 }, &cfg).is_err());
        let bad = SolverConfig { stages: 0, ..SolverConfig::default() };
        assert!(solve(&phi, &b, &WeightScheme::Identity, &bad).is_err());
    }

    fn small_problem() -> impl Strategy<Value = (DenseMatrix, Vec<f64>, Vec<f64>, f64)> {
        (1usize..5, 1usize..7).prop_flat_map(|(m, n)| {
            (
                proptest::collection::vec(-2.0f64..2.0, m * n),
                proptest::collection::vec(-2.0f64..2.0, m),
                proptest::collection::vec(0.05f64..1.0, n),
                0.0f64..1.0,
            )
                .prop_map(move |(d, b, w, mu)| (DenseMatrix::new(m, n, d).unwrap(), b, w, mu))
        })
    }

    proptest! {
        #[test]
        fn inner_iterations_never_increase_objective((phi, b, w, mu) in small_problem()) {
            let l = linops::largest_gram_eigenvalue(&phi).value * (1.0 + 1e-6);
            prop_assume!(l > 0.0);
            let x0 = vec![1.0; phi.cols()];
            let out = ista_stage(&phi, &b, &x0, StageParams {
                weights: &w, mu, lipschitz: l, eta: 1e-9, cap: 300, track_objective: true,
            }).unwrap();
            for pair in out.objective_trace.windows(2) {
                prop_assert!(pair[1] <= pair[0] + 1e-12, "{} -> {}", pair[0], pair[1]);
            }
        }

        #[test]
        fn converged_fixed_point_is_stable((phi, b, w, mu) in small_problem()) {
            let l = linops::largest_gram_eigenvalue(&phi).value * (1.0 + 1e-6);
            prop_assume!(l > 0.0);
            let x0 = vec![0.0; phi.cols()];
            let out = ista_stage(&phi, &b, &x0, StageParams {
                weights: &w, mu, lipschitz: l, eta: 0.0, cap: 20000, track_objective: false,
            }).unwrap();
            // only meaningful once the iteration has stopped moving
            let again = prox_step(&phi, &b, &w, mu, l, &out.x);
            let moved = linops::norm_inf(&linops::sub(&again, &out.x));
            if out.final_step_norm == 0.0 {
                prop_assert!(moved <= 1e-14);
            }
        }

        #[test]
        fn nullspace_weights_in_unit_interval(
            prev in proptest::collection::vec(-3.0f64..3.0, 1..12),
            seed in proptest::collection::vec(-3.0f64..3.0, 12),
            zero_mask in proptest::collection::vec(any::<bool>(), 12),
            q in 0.01f64..1.0,
        ) {
            let curr: Vec<f64> = (0..prev.len()).map(|i| if zero_mask[i] { 0.0 } else { seed[i] }).collect();
            let w = update_weights_nullspace(&prev, &curr, q, 1e-4).unwrap();
            prop_assert!(w.iter().all(|v| *v > 0.0 && *v <= 1.0));
        }

        #[test]
        fn soft_threshold_zeroes_exactly(v in proptest::collection::vec(-5.0f64..5.0, 1..10), t in 0.0f64..3.0) {
            let ts = vec![t; v.len()];
            let out = soft_threshold(&v, &ts).unwrap();
            for (o, vi) in out.iter().zip(&v) {
                if vi.abs() <= t {
                    prop_assert_eq!(o.to_bits(), 0.0f64.to_bits());
                } else {
                    prop_assert!(*o != 0.0 && o.signum() == vi.signum());
                }
            }
        }
    }
}
