//! Null space property checks and the concentration set `T₀`.
//!
//! All checks reduce to maximizing the top-`k` ℓ1 mass of a unit-ℓ1 kernel
//! vector. That objective is convex, so the maximum over the kernel section is
//! attained at one of its vertices and a finite enumeration is exact.

use serde::Serialize;

use crate::certificates::vertices::{l1ball_section_vertices, VertexSet};
use crate::error::{Error, Result};
use crate::linops::{self, kernel_basis, DenseMatrix, IndexSet};
use crate::solver::top_k_indices;

/// Margins within this distance of zero count as violations.
pub const MARGIN_TOL: f64 = 1e-12;
/// Absolute gap below which two support values are considered tied.
pub const UNIQUENESS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct NspWitness {
    /// Unit-ℓ1 kernel vector, in original coordinates.
    pub vertex: Vec<f64>,
    pub set: IndexSet,
}

#[derive(Clone, Debug, Serialize)]
pub struct NspReport {
    pub holds: bool,
    pub order: usize,
    /// `max ‖v_S‖₁ − ½` over section vertices `v` and `|S| = k`
    /// (of `ω∘v`, renormalized, for the weighted check).
    pub worst_margin: f64,
    pub witness: Option<NspWitness>,
    pub vacuous: bool,
    pub weights: Option<Vec<f64>>,
}

impl NspReport {
    pub fn worst_mass(&self) -> f64 {
        self.worst_margin + 0.5
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct T0Report {
    pub t0: IndexSet,
    /// Maximizing unit-ℓ1 kernel vertex.
    pub hhat: Vec<f64>,
    /// `‖ĥ_{T₀}‖₁`.
    pub value: f64,
    pub unique: bool,
    /// Best `‖h_T‖₁` over unit-ℓ1 kernel vectors and sets `T ≠ T₀`.
    pub second_value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaInterval {
    /// Exclusive lower end: `second_value / value`, or 1 when `T₀` is tied.
    pub lo: f64,
    /// Exclusive upper end from `‖ĥ_{T₀ᶜ}‖₁ > γ‖ĥ_{T₀}‖₁`.
    pub hi_wnsp: f64,
    /// Exclusive upper end from the RIC bound at a measured `δ_{ak}`.
    pub hi_ric: Option<f64>,
    pub feasible: bool,
}

/// Budget `(a, δ)` for the RIC route: `δ` is a measured `δ_{ak}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RicBudget {
    pub a: f64,
    pub delta: f64,
}

fn check_order(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("order k = {k} must lie in 1..={n}")));
    }
    Ok(())
}

/// Top-`k` magnitude mass of `v` and the set attaining it.
pub fn top_k_mass(v: &[f64], k: usize) -> (f64, Vec<usize>) {
    let mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let set = top_k_indices(&mags, k);
    (set.iter().map(|&i| mags[i]).sum(), set)
}

fn worst_over(vertices: &VertexSet, k: usize) -> Option<(f64, usize, Vec<usize>)> {
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    for (idx, v) in vertices.vertices().iter().enumerate() {
        let (mass, set) = top_k_mass(v, k);
        if best.as_ref().is_none_or(|b| mass > b.0) {
            best = Some((mass, idx, set));
        }
    }
    best
}

/// Unweighted null space property of order `k`.
pub fn check_nsp(phi: &DenseMatrix, k: usize) -> Result<NspReport> {
    let n = phi.cols();
    check_order(k, n)?;
    let vertices = l1ball_section_vertices(&kernel_basis(phi))?;
    Ok(report_from(&vertices, k, None, |v| v.to_vec()))
}

/// Weighted null space property, via the rescaled subspace `D_ω·N(Φ)`.
pub fn check_wnsp(phi: &DenseMatrix, weights: &[f64], k: usize) -> Result<NspReport> {
    let n = phi.cols();
    check_order(k, n)?;
    if weights.len() != n {
        return Err(Error::Dimension(format!("{} weights for {n} columns", weights.len())));
    }
    if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidArgument("weights must be strictly positive".into()));
    }
    let scaled = kernel_basis(phi).scaled(weights)?;
    let vertices = l1ball_section_vertices(&scaled)?;
    Ok(report_from(&vertices, k, Some(weights.to_vec()), |g| {
        let mut h: Vec<f64> = g.iter().zip(weights).map(|(x, w)| x / w).collect();
        let n1 = linops::norm1(&h);
        linops::scale_in_place(&mut h, 1.0 / n1);
        h
    }))
}

fn report_from(
    vertices: &VertexSet,
    k: usize,
    weights: Option<Vec<f64>>,
    to_original: impl Fn(&[f64]) -> Vec<f64>,
) -> NspReport {
    let n = vertices.ambient();
    match worst_over(vertices, k) {
        None => NspReport { holds: true, order: k, worst_margin: -0.5, witness: None, vacuous: true, weights },
        Some((mass, idx, set)) => {
            let margin = mass - 0.5;
            NspReport {
                holds: margin < -MARGIN_TOL,
                order: k,
                worst_margin: margin,
                witness: Some(NspWitness {
                    vertex: to_original(&vertices.vertices()[idx]),
                    set: IndexSet::new(set, n).expect("top-k indices are valid"),
                }),
                vacuous: false,
                weights,
            }
        }
    }
}

/// NSP verdict checked literally on the section `‖h‖₁ = scale`:
/// `‖h_S‖₁ < ‖h_{Sᶜ}‖₁` for every vertex `h` and every `|S| = k`.
pub fn nsp_holds_at_scale(phi: &DenseMatrix, k: usize, scale: f64) -> Result<bool> {
    check_order(k, phi.cols())?;
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument("section scale must be positive".into()));
    }
    let vertices = l1ball_section_vertices(&kernel_basis(phi))?;
    Ok(vertices.scaled(scale).iter().all(|h| {
        let (on_s, _) = top_k_mass(h, k);
        let off_s = linops::norm1(h) - on_s;
        on_s - off_s < -2.0 * MARGIN_TOL * scale
    }))
}

/// Support set and kernel vector of maximal top-`k` concentration.
pub fn compute_t0(phi: &DenseMatrix, k: usize) -> Result<T0Report> {
    let n = phi.cols();
    check_order(k, n)?;
    let vertices = l1ball_section_vertices(&kernel_basis(phi))?;
    if vertices.is_empty() {
        return Err(Error::TrivialKernel);
    }
    let per_vertex: Vec<(f64, Vec<usize>, f64)> = vertices
        .vertices()
        .iter()
        .map(|v| {
            let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
            let (value, set) = top_k_mass(v, k);
            // best set other than this vertex's own: swap the weakest member
            // for the strongest outsider
            mags.sort_by(|a, b| b.total_cmp(a));
            let alt = if k < n { value - mags[k - 1] + mags[k] } else { f64::NEG_INFINITY };
            (value, set, alt)
        })
        .collect();
    let (best_idx, _) = per_vertex
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (i, p)| if p.0 > acc.1 { (i, p.0) } else { acc });
    let (value, t0_set, _) = per_vertex[best_idx].clone();
    let second_value = per_vertex
        .iter()
        .map(|(v, set, alt)| if *set != t0_set { *v } else { *alt })
        .fold(f64::NEG_INFINITY, f64::max);
    let second_value = if second_value.is_finite() { second_value } else { 0.0 };
    Ok(T0Report {
        t0: IndexSet::new(t0_set, n)?,
        hhat: vertices.vertices()[best_idx].clone(),
        value,
        unique: second_value < value - UNIQUENESS_TOL,
        second_value,
    })
}

/// Admissible range of the down-weight `γ` applied on `T₀`.
pub fn gamma_interval(phi: &DenseMatrix, k: usize, budget: Option<RicBudget>) -> Result<GammaInterval> {
    let t0 = compute_t0(phi, k)?;
    gamma_interval_from(&t0, budget)
}

pub fn gamma_interval_from(t0: &T0Report, budget: Option<RicBudget>) -> Result<GammaInterval> {
    let lo = if t0.unique { t0.second_value / t0.value } else { 1.0 };
    let hi_wnsp = (1.0 - t0.value) / t0.value;
    let hi_ric = match budget {
        None => None,
        Some(RicBudget { a, delta }) => {
            if !(a > 1.0) || !(delta > 0.0) {
                return Err(Error::InvalidArgument(format!("RIC budget needs a > 1 and δ > 0, got a={a}, δ={delta}")));
            }
            let d2 = delta * delta;
            Some(((a - 1.0) * (1.0 - d2) / d2).max(0.0).sqrt())
        }
    };
    Ok(GammaInterval { lo, hi_wnsp, hi_ric, feasible: lo < hi_wnsp.min(1.0) })
}
