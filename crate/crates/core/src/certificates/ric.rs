//! Exact restricted isometry / orthogonality constants by subset enumeration,
//! plus the closed-form recovery bounds they are compared against.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linops::{binomial, spectral_norm, subsets, DenseMatrix, IndexSet};

/// Default ceiling on subset evaluations.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct RicValue {
    pub order: usize,
    pub value: f64,
    pub attained_at: IndexSet,
}

#[derive(Clone, Debug, Serialize)]
pub struct RocValue {
    pub orders: (usize, usize),
    pub value: f64,
    pub attained_at: (IndexSet, IndexSet),
}

fn enforce_cap(required: u128, cap: u128) -> Result<()> {
    if required > cap {
        return Err(Error::EnumerationCap { required, cap });
    }
    Ok(())
}

// Larger value wins; equal values keep the lexicographically smaller key so the
// result does not depend on how the work was split.
fn better<K: Ord>(a: (f64, K), b: (f64, K)) -> (f64, K) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

/// `δ_k = max_{|S|=k} ‖Φ_SᵀΦ_S − I‖₂`.
pub fn compute_ric(phi: &DenseMatrix, k: usize, cap: u128) -> Result<RicValue> {
    let n = phi.cols();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("RIC order k = {k} must lie in 1..={n}")));
    }
    enforce_cap(binomial(n, k), cap)?;
    let sets: Vec<IndexSet> = subsets(n, k).collect();
    let (value, attained_at) = sets
        .into_par_iter()
        .map(|s| {
            let sub = phi.column_submatrix(&s).expect("subset within range");
            let dev = sub.gram().sub_identity().expect("square gram");
            (spectral_norm(&dev), s)
        })
        .reduce_with(better)
        .expect("at least one subset");
    Ok(RicValue { order: k, value, attained_at })
}

/// Number of disjoint `(S₁, S₂)` pairs with `|S₁| = k1`, `|S₂| = k2`.
pub fn roc_work(n: usize, k1: usize, k2: usize) -> u128 {
    if k1 + k2 > n {
        return 0;
    }
    binomial(n, k1) * binomial(n - k1, k2)
}

/// `θ_{k1,k2} = max ‖Φ_{S₁}ᵀΦ_{S₂}‖₂` over disjoint supports.
pub fn compute_roc(phi: &DenseMatrix, k1: usize, k2: usize, cap: u128) -> Result<RocValue> {
    let n = phi.cols();
    if k1 == 0 || k2 == 0 || k1 + k2 > n {
        return Err(Error::InvalidArgument(format!(
            "ROC orders ({k1}, {k2}) need k1, k2 ≥ 1 and k1 + k2 ≤ {n}"
        )));
    }
    enforce_cap(roc_work(n, k1, k2), cap)?;
    let firsts: Vec<IndexSet> = subsets(n, k1).collect();
    let (value, attained_at) = firsts
        .into_par_iter()
        .map(|s1| {
            let a = phi.column_submatrix(&s1).expect("subset within range");
            let rest = s1.complement();
            subsets(rest.len(), k2)
                .map(|local| {
                    let s2 = IndexSet::new(local.iter().map(|i| rest.indices()[i]).collect(), n)
                        .expect("complement indices are valid");
                    let b = phi.column_submatrix(&s2).expect("subset within range");
                    let cross = a.t_mul(&b).expect("shared rows");
                    (spectral_norm(&cross), (s1.clone(), s2))
                })
                .reduce(better)
                .expect("k1 + k2 ≤ n leaves a second subset")
        })
        .reduce_with(better)
        .expect("at least one subset");
    Ok(RocValue { orders: (k1, k2), value, attained_at })
}

/// `sqrt((a − 1)/(a − 1 + γ²))`: admissible `δ_{ak}` for weighted recovery.
pub fn weighted_ric_bound(a: f64, gamma: f64) -> Result<f64> {
    if !(a > 1.0) || !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidArgument(format!("need a > 1 and γ in (0,1], got a={a}, γ={gamma}")));
    }
    Ok(((a - 1.0) / (a - 1.0 + gamma * gamma)).sqrt())
}

/// Admissible `δ_k` for weighted recovery:
/// `1/(1 + 2⌈γk⌉/k)` for even `k`, `1/(1 + 2⌈γk⌉/√(k² − 1))` for odd `k ≥ 3`.
pub fn weighted_ric_bound_order_k(k: usize, gamma: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("order k = {k} must be at least 2")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidArgument(format!("γ = {gamma} must lie in (0,1]")));
    }
    let kf = k as f64;
    // guard ceil against products like 0.75·4 landing a hair above an integer
    let prod = gamma * kf;
    let ceil = if (prod - prod.round()).abs() <= 1e-12 * kf { prod.round() } else { prod.ceil() };
    let denom = if k.is_multiple_of(2) { kf } else { (kf * kf - 1.0).sqrt() };
    Ok(1.0 / (1.0 + 2.0 * ceil / denom))
}

/// One `(γ, δ_{2k}, δ_{3k}, δ_{4k})` row of the `δ_{ak}` bound table.
#[derive(Clone, Debug, Serialize)]
pub struct AkBoundRow {
    pub gamma: f64,
    pub bounds: [f64; 3],
}

pub const AK_TABLE_GAMMAS: [f64; 4] = [1.0, 0.75, 0.5, 0.25];

pub fn ak_bound_table() -> Vec<AkBoundRow> {
    AK_TABLE_GAMMAS
        .iter()
        .map(|&gamma| AkBoundRow {
            gamma,
            bounds: [2.0, 3.0, 4.0].map(|a| weighted_ric_bound(a, gamma).expect("valid table inputs")),
        })
        .collect()
}

/// Bound on `δ_k` over a range `k ≥ k_min` of one parity.
#[derive(Clone, Debug, Serialize)]
pub struct OrderKRange {
    pub k_min: usize,
    /// Value at `k = k_min`.
    pub leading: f64,
    /// Infimum over all `k ≥ k_min` of the parity (attained at `argmin_k`).
    pub infimum: f64,
    pub argmin_k: usize,
    /// `(k, bound)` for the first few admissible `k`.
    pub per_k: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderKBoundRow {
    pub gamma: f64,
    pub even: OrderKRange,
    pub odd: OrderKRange,
}

/// `(γ, even k_min, odd k_min)` rows of the `δ_k` bound table.
pub const ORDER_K_TABLE: [(f64, usize, usize); 5] =
    [(1.0, 2, 3), (0.75, 4, 5), (0.5, 2, 5), (0.25, 4, 5), (1.0 / 6.0, 6, 5)];

// The bound tends to 1/(1 + 2γ) from below, so its infimum is attained at a
// finite k; scanning this far covers every γ in the table with ample room.
const SCAN_LIMIT: usize = 4000;
const PER_K_SHOWN: usize = 6;

pub fn order_k_range(gamma: f64, k_min: usize) -> Result<OrderKRange> {
    let ks: Vec<usize> = (k_min..=SCAN_LIMIT).step_by(2).collect();
    let mut values = Vec::with_capacity(ks.len());
    for &k in &ks {
        values.push((k, weighted_ric_bound_order_k(k, gamma)?));
    }
    let (argmin_k, infimum) = values
        .iter()
        .copied()
        .fold((0usize, f64::INFINITY), |acc, (k, v)| if v < acc.1 - 1e-15 { (k, v) } else { acc });
    Ok(OrderKRange {
        k_min,
        leading: values[0].1,
        infimum,
        argmin_k,
        per_k: values.into_iter().take(PER_K_SHOWN).collect(),
    })
}

pub fn order_k_bound_table() -> Vec<OrderKBoundRow> {
    ORDER_K_TABLE
        .iter()
        .map(|&(gamma, even_min, odd_min)| OrderKBoundRow {
            gamma,
            even: order_k_range(gamma, even_min).expect("valid table inputs"),
            odd: order_k_range(gamma, odd_min).expect("valid table inputs"),
        })
        .collect()
}
