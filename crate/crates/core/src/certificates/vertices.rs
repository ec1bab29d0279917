//! Extreme points of the ℓ1-unit-ball section of a subspace.
//!
//! For a `d`-dimensional subspace `V`, every vertex of `{h ∈ V : ‖h‖₁ ≤ 1}` is
//! pinned down by `d − 1` independent coordinate constraints `h_i = 0`. We try
//! every such zero set, keep those leaving a one-dimensional solution line, and
//! normalize. Any convex function of `h` (e.g. `‖h_S‖₁`) attains its maximum over
//! the section at one of these points.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::linops::{self, SubspaceBasis};

const NULL_TOL: f64 = 1e-10;
const DEDUP_TOL: f64 = 1e-9;
// Coordinates this small after normalization are numerical residue of a forced zero.
const ZERO_SNAP: f64 = 1e-13;

#[derive(Clone, Debug, Serialize)]
pub struct VertexSet {
    ambient: usize,
    vertices: Vec<Vec<f64>>,
    /// Zero sets whose solution space was more than one-dimensional.
    pub degenerate_zero_sets: usize,
    /// Degenerate zero sets still unresolved at the recursion depth limit.
    pub abandoned_zero_sets: usize,
}

impl VertexSet {
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Every vertex multiplied by `s`, i.e. the section at `‖h‖₁ = s`.
    pub fn scaled(&self, s: f64) -> Vec<Vec<f64>> {
        self.vertices.iter().map(|v| v.iter().map(|x| x * s).collect()).collect()
    }
}

/// Enumerates the vertices of `span(B) ∩ {‖h‖₁ ≤ 1}`.
pub fn l1ball_section_vertices(basis: &SubspaceBasis) -> Result<VertexSet> {
    let n = basis.ambient();
    let d = basis.dim();
    let mut out = VertexSet { ambient: n, vertices: Vec::new(), degenerate_zero_sets: 0, abandoned_zero_sets: 0 };
    if d == 0 {
        return Ok(out);
    }
    // row i of the basis matrix = coordinate i as a functional on coefficients
    let rows: Vec<Vec<f64>> = (0..n).map(|i| basis.vectors().iter().map(|v| v[i]).collect()).collect();
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut zero_set = Vec::with_capacity(d);
    enumerate(&rows, basis, d - 1, 0, &mut zero_set, &mut found, &mut out, 0);
    let mut canonical: Vec<Vec<f64>> = Vec::new();
    for v in found {
        if !canonical.iter().any(|c| linops::norm_inf(&linops::sub(c, &v)) <= DEDUP_TOL) {
            canonical.push(v);
        }
    }
    for v in canonical {
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        out.vertices.push(v);
        out.vertices.push(neg);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    rows: &[Vec<f64>],
    basis: &SubspaceBasis,
    remaining: usize,
    start: usize,
    zero_set: &mut Vec<usize>,
    found: &mut Vec<Vec<f64>>,
    stats: &mut VertexSet,
    depth: usize,
) {
    if remaining == 0 {
        resolve(rows, basis, zero_set, found, stats, depth);
        return;
    }
    for i in start..rows.len() {
        zero_set.push(i);
        enumerate(rows, basis, remaining - 1, i + 1, zero_set, found, stats, depth);
        zero_set.pop();
    }
}

fn resolve(
    rows: &[Vec<f64>],
    basis: &SubspaceBasis,
    zero_set: &mut Vec<usize>,
    found: &mut Vec<Vec<f64>>,
    stats: &mut VertexSet,
    depth: usize,
) {
    let d = basis.dim();
    let null = null_space(rows, zero_set, d);
    match null.len() {
        0 => {}
        1 => {
            let mut h = basis.combine(&null[0]);
            for &z in zero_set.iter() {
                h[z] = 0.0;
            }
            if let Some(v) = normalize_canonical(h) {
                found.push(v);
            }
        }
        _ => {
            stats.degenerate_zero_sets += 1;
            if depth >= d {
                stats.abandoned_zero_sets += 1;
                return;
            }
            // Force one more coordinate to zero. Any line found here is also
            // reachable from a non-degenerate zero set; this only adds duplicates.
            for extra in 0..rows.len() {
                if zero_set.contains(&extra) {
                    continue;
                }
                zero_set.push(extra);
                resolve(rows, basis, zero_set, found, stats, depth + 1);
                zero_set.pop();
            }
        }
    }
}

// Coefficient vectors c with rows[z]·c = 0 for all z in the zero set.
fn null_space(rows: &[Vec<f64>], zero_set: &[usize], d: usize) -> Vec<Vec<f64>> {
    if zero_set.is_empty() {
        return (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    }
    let size = zero_set.len().max(d);
    let mut m = DMatrix::<f64>::zeros(size, d);
    for (r, &z) in zero_set.iter().enumerate() {
        for c in 0..d {
            m[(r, c)] = rows[z][c];
        }
    }
    let svd = nalgebra::linalg::SVD::new(m, false, true);
    let v_t = svd.v_t.expect("requested");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().copied().fold(0.0, f64::max).max(1.0);
    (0..sigma.len())
        .filter(|&i| sigma[i] <= NULL_TOL * smax * size as f64)
        .map(|i| v_t.row(i).iter().copied().collect())
        .collect()
}

// ℓ1-normalize and fix the sign so the first significant entry is positive.
fn normalize_canonical(mut h: Vec<f64>) -> Option<Vec<f64>> {
    let n1 = linops::norm1(&h);
    if n1 <= 1e-300 {
        return None;
    }
    linops::scale_in_place(&mut h, 1.0 / n1);
    for x in h.iter_mut() {
        if x.abs() < ZERO_SNAP {
            *x = 0.0;
        }
    }
    let lead = h.iter().find(|x| **x != 0.0).copied().unwrap_or(1.0);
    if lead < 0.0 {
        h.iter_mut().for_each(|x| *x = -*x);
    }
    let n1 = linops::norm1(&h);
    linops::scale_in_place(&mut h, 1.0 / n1);
    Some(h)
}
