//! Weighted basis pursuit `min ‖ω∘x‖₁ s.t. Φx = b` as a linear program.
//!
//! Split `x = u − v` with `u, v ≥ 0` and solve the standard-form LP with a
//! two-phase dense-tableau simplex using Bland's rule. The final basic solution
//! is re-solved against the original columns to shed accumulated pivot error.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linops::{self, DenseMatrix};

pub const PIVOT_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// `‖ω∘x‖₁` at the returned point.
    pub objective: f64,
    pub pivots: usize,
}

/// Exact minimizer of `‖ω∘x‖₁` subject to `Φx = b`.
pub fn l1_min_exact(phi: &DenseMatrix, b: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    Ok(l1_min_exact_report(phi, b, weights)?.x)
}

pub fn l1_min_exact_report(phi: &DenseMatrix, b: &[f64], weights: &[f64]) -> Result<LpSolution> {
    let (m, n) = (phi.rows(), phi.cols());
    if b.len() != m {
        return Err(Error::Dimension(format!("observation length {} for {m} rows", b.len())));
    }
    if weights.len() != n {
        return Err(Error::Dimension(format!("{} weights for {n} columns", weights.len())));
    }
    if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidArgument("weights must be strictly positive".into()));
    }
    // columns 0..n are u, n..2n are v
    let mut a = vec![vec![0.0; 2 * n]; m];
    for (r, row) in a.iter_mut().enumerate() {
        for c in 0..n {
            row[c] = phi.get(r, c);
            row[n + c] = -phi.get(r, c);
        }
    }
    let cost: Vec<f64> = weights.iter().chain(weights.iter()).copied().collect();
    let (z, pivots) = simplex_standard_form(&a, b, &cost)?;
    let x: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
    let objective = weights.iter().zip(&x).map(|(w, v)| w * v.abs()).sum();
    Ok(LpSolution { x, objective, pivots })
}

struct Tableau {
    // rows: constraint rows, each with `cols` coefficients followed by the rhs
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    // original row index for each tableau row (rows may be dropped)
    origin: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.cols]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let p = self.rows[pr][pc];
        for v in self.rows[pr].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[pr].clone();
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == pr {
                continue;
            }
            let f = row[pc];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    // Reduced costs for `cost` (indexed by column) under the current basis.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut r = cost.to_vec();
        for (row, &bv) in self.rows.iter().zip(&self.basis) {
            let cb = cost[bv];
            if cb == 0.0 {
                continue;
            }
            for (rj, aj) in r.iter_mut().zip(row.iter().take(self.cols)) {
                *rj -= cb * aj;
            }
        }
        r
    }

    /// Bland's-rule simplex over columns `0..allowed`. Returns pivots used.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<usize> {
        let mut pivots = 0;
        loop {
            let reduced = self.reduced_costs(cost);
            let Some(enter) = (0..allowed).find(|&j| reduced[j] < -PIVOT_TOL && !self.basis.contains(&j)) else {
                return Ok(pivots);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let coef = self.rows[r][enter];
                if coef <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / coef;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - PIVOT_TOL
                            || ((ratio - lratio).abs() <= PIVOT_TOL && self.basis[r] < self.basis[lr])
                        {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            let Some((pr, _)) = leave else {
                return Err(Error::Internal("weighted ℓ1 program reported unbounded".into()));
            };
            self.pivot(pr, enter);
            pivots += 1;
            if pivots > MAX_PIVOTS {
                return Err(Error::Internal("simplex pivot limit exceeded".into()));
            }
        }
    }
}

/// `min cᵀz s.t. A z = b, z ≥ 0`. Returns the optimal `z` and the pivot count.
pub(crate) fn simplex_standard_form(a: &[Vec<f64>], b: &[f64], cost: &[f64]) -> Result<(Vec<f64>, usize)> {
    let m = a.len();
    let nvars = cost.len();
    let cols = nvars + m;
    let mut rows = Vec::with_capacity(m);
    for (r, row) in a.iter().enumerate() {
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        let mut t = Vec::with_capacity(cols + 1);
        t.extend(row.iter().map(|v| sign * v));
        t.extend((0..m).map(|i| if i == r { 1.0 } else { 0.0 }));
        t.push(sign * b[r]);
        rows.push(t);
    }
    let mut tab = Tableau { rows, basis: (nvars..cols).collect(), origin: (0..m).collect(), cols };

    // phase 1: drive the artificials to zero
    let phase1_cost: Vec<f64> = (0..cols).map(|j| if j >= nvars { 1.0 } else { 0.0 }).collect();
    let mut pivots = tab.optimize(&phase1_cost, nvars)?;
    let infeasibility: f64 = tab.basis.iter().zip(&tab.rows).filter(|(bv, _)| **bv >= nvars).map(|(_, row)| row[cols]).sum();
    let scale = 1.0 + linops::norm_inf(b);
    if infeasibility > 1e-8 * scale {
        return Err(Error::Infeasible);
    }

    // pivot remaining (zero-level) artificials out, dropping redundant rows
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= nvars {
            let col = (0..nvars)
                .filter(|j| !tab.basis.contains(j))
                .max_by(|&i, &j| tab.rows[r][i].abs().total_cmp(&tab.rows[r][j].abs()));
            match col {
                Some(j) if tab.rows[r][j].abs() > PIVOT_TOL => {
                    tab.pivot(r, j);
                    pivots += 1;
                }
                _ => {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                    tab.origin.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut phase2_cost = cost.to_vec();
    phase2_cost.extend(std::iter::repeat_n(0.0, m));
    pivots += tab.optimize(&phase2_cost, nvars)?;

    let mut z = vec![0.0; nvars];
    for (row, &bv) in tab.rows.iter().zip(&tab.basis) {
        z[bv] = row[cols];
    }
    refine_basic_solution(a, b, &tab, &mut z);
    Ok((z, pivots))
}

// Re-solve B z_B = b with the original basic columns for a clean final answer.
fn refine_basic_solution(a: &[Vec<f64>], b: &[f64], tab: &Tableau, z: &mut [f64]) {
    let k = tab.basis.len();
    if k == 0 {
        return;
    }
    let basis_matrix = DMatrix::from_fn(k, k, |i, j| a[tab.origin[i]][tab.basis[j]]);
    let rhs = nalgebra::DVector::from_iterator(k, tab.origin.iter().map(|&o| b[o]));
    if let Some(sol) = basis_matrix.lu().solve(&rhs) {
        if sol.iter().all(|v| v.is_finite() && *v >= -1e-7) {
            for (j, &bv) in tab.basis.iter().enumerate() {
                z[bv] = sol[j].max(0.0);
            }
        }
    }
}
