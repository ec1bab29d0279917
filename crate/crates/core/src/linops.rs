//! Dense linear algebra and combinatorial helpers.
//!
//! Matrices are small-to-moderate and dense: row-major storage, plain loops for
//! products, nalgebra only where a full decomposition is required (kernels).

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative stopping tolerance on the Rayleigh quotient in power iteration.
pub const POWER_TOL: f64 = 1e-12;
/// Iteration cap for a single power-iteration run.
pub const POWER_MAX_ITER: usize = 10_000;
/// Kernel rank cutoff factor, scaled by `σmax · max(rows, cols)`.
pub const RANK_TOL: f64 = 1e-10;

/// Dense real matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {ncols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(nrows, ncols, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in d.iter().enumerate() {
            data[i * n + i] = *v;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matvec: {}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok(self.matvec_unchecked(x))
    }

    pub(crate) fn matvec_unchecked(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    /// `Aᵀ y`.
    pub fn matvec_t(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::Dimension(format!(
                "transposed matvec: {}x{} matrix with vector of length {}",
                self.rows,
                self.cols,
                y.len()
            )));
        }
        Ok(self.matvec_t_unchecked(y))
    }

    pub(crate) fn matvec_t_unchecked(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a * yr;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    /// `Aᵀ B` for matrices sharing a row count.
    pub fn t_mul(&self, other: &DenseMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!(
                "AᵀB with {} and {} rows",
                self.rows, other.rows
            )));
        }
        let mut data = vec![0.0; self.cols * other.cols];
        for r in 0..self.rows {
            let a = self.row(r);
            let b = other.row(r);
            for (i, ai) in a.iter().enumerate() {
                if *ai == 0.0 {
                    continue;
                }
                let dst = &mut data[i * other.cols..(i + 1) * other.cols];
                for (d, bj) in dst.iter_mut().zip(b) {
                    *d += ai * bj;
                }
            }
        }
        Ok(Self { rows: self.cols, cols: other.cols, data })
    }

    pub fn gram(&self) -> Self {
        self.t_mul(self).expect("same matrix")
    }

    /// Columns of `A` restricted to `set`, in order.
    pub fn column_submatrix(&self, set: &IndexSet) -> Result<Self> {
        if set.ambient() != self.cols {
            return Err(Error::Dimension(format!(
                "index set over {} coordinates applied to {} columns",
                set.ambient(),
                self.cols
            )));
        }
        if set.is_empty() {
            return Err(Error::InvalidArgument("empty column selection".into()));
        }
        let mut data = Vec::with_capacity(self.rows * set.len());
        for r in 0..self.rows {
            let row = self.row(r);
            data.extend(set.iter().map(|c| row[c]));
        }
        Ok(Self { rows: self.rows, cols: set.len(), data })
    }

    /// Matrix with each column `j` multiplied by `d[j]`.
    pub fn scale_columns(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.cols {
            return Err(Error::Dimension("column scaling length".into()));
        }
        let mut out = self.clone();
        for r in 0..self.rows {
            for (v, s) in out.data[r * self.cols..(r + 1) * self.cols].iter_mut().zip(d) {
                *v *= s;
            }
        }
        Ok(out)
    }

    pub fn sub_identity(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Dimension("A − I needs a square matrix".into()));
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            out.data[i * self.cols + i] -= 1.0;
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    /// Parses the text format: `rows cols` header, then one row per line.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut data = Vec::new();
        let mut rows_seen = 0usize;
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            match header {
                None => {
                    let dims: Vec<&str> = trimmed.split_whitespace().collect();
                    if dims.len() != 2 {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: "expected header `rows cols`".into(),
                        });
                    }
                    let parse_dim = |s: &str| {
                        s.parse::<usize>().map_err(|_| Error::Parse {
                            line: lineno,
                            msg: format!("bad dimension `{s}`"),
                        })
                    };
                    header = Some((parse_dim(dims[0])?, parse_dim(dims[1])?));
                }
                Some((rows, cols)) => {
                    if rows_seen == rows {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("more than {rows} data rows"),
                        });
                    }
                    let before = data.len();
                    for tok in trimmed.split_whitespace() {
                        let v: f64 = tok.parse().map_err(|_| Error::Parse {
                            line: lineno,
                            msg: format!("bad number `{tok}`"),
                        })?;
                        if !v.is_finite() {
                            return Err(Error::Parse {
                                line: lineno,
                                msg: format!("non-finite value `{tok}`"),
                            });
                        }
                        data.push(v);
                    }
                    if data.len() - before != cols {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("expected {cols} values, found {}", data.len() - before),
                        });
                    }
                    rows_seen += 1;
                }
            }
        }
        let (rows, cols) = header.ok_or(Error::Parse { line: 0, msg: "empty input".into() })?;
        if rows_seen != rows {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {rows} data rows, found {rows_seen}"),
            });
        }
        Self::new(rows, cols, data)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(std::io::BufReader::new(f))
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line = self.row(r).iter().map(|v| format!("{v:e}")).join(" ");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Reads a vector stored as an `n 1` (or `1 n`) matrix.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = DenseMatrix::read_file(path)?;
    if m.cols() != 1 && m.rows() != 1 {
        return Err(Error::Dimension(format!(
            "{}: expected a single column, found {}x{}",
            path.display(),
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.data)
}

pub fn write_vector<W: Write>(v: &[f64], w: W) -> Result<()> {
    DenseMatrix { rows: v.len(), cols: 1, data: v.to_vec() }.write_text(w)
}

/// Sorted, duplicate-free coordinate subset of `0..ambient`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexSet {
    indices: Vec<usize>,
    ambient: usize,
}

impl IndexSet {
    pub fn new(mut indices: Vec<usize>, ambient: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate index in set".into()));
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= ambient) {
            return Err(Error::IndexOutOfRange { index, ambient });
        }
        Ok(Self { indices, ambient })
    }

    pub fn full(ambient: usize) -> Self {
        Self { indices: (0..ambient).collect(), ambient }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn complement(&self) -> Self {
        let indices = (0..self.ambient).filter(|i| !self.contains(*i)).collect();
        Self { indices, ambient: self.ambient }
    }

    /// Indices shifted to 1-based, for human-facing output.
    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.indices.iter().join(","))
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> impl Iterator<Item = IndexSet> {
    (0..n).combinations(k).map(move |indices| IndexSet { indices, ambient: n })
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Orthonormal basis (columns) of a subspace of `R^ambient`.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    ambient: usize,
    // ambient x dim, column j is basis vector j
    vectors: Vec<Vec<f64>>,
}

impl SubspaceBasis {
    /// Orthonormalizes the given spanning vectors (thin QR).
    pub fn from_spanning(ambient: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != ambient) {
            return Err(Error::Dimension("spanning vector length".into()));
        }
        if vectors.is_empty() {
            return Ok(Self { ambient, vectors: Vec::new() });
        }
        let d = vectors.len();
        let m = DMatrix::from_fn(ambient, d, |r, c| vectors[c][r]);
        let q = nalgebra::linalg::QR::new(m).q();
        let vectors = (0..d).map(|c| q.column(c).iter().copied().collect()).collect();
        Ok(Self { ambient, vectors })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// `B c` for coefficient vector `c`.
    pub fn combine(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient];
        for (v, c) in self.vectors.iter().zip(coeffs) {
            for (o, vi) in out.iter_mut().zip(v) {
                *o += c * vi;
            }
        }
        out
    }

    /// Basis of `{ d ∘ h : h ∈ span }`.
    pub fn scaled(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.ambient {
            return Err(Error::Dimension("scaling vector length".into()));
        }
        let spanning: Vec<Vec<f64>> = self
            .vectors
            .iter()
            .map(|v| v.iter().zip(d).map(|(a, b)| a * b).collect())
            .collect();
        Self::from_spanning(self.ambient, &spanning)
    }
}

/// Result of a power-iteration eigenvalue estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GramEigen {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `λmax(AᵀA)` by power iteration.
///
/// Runs from the all-ones direction and once more from a fixed pseudorandom
/// direction; the larger Rayleigh quotient wins. A single start can lock onto a
/// lower eigenvalue when it is orthogonal to the top eigenvector.
pub fn largest_gram_eigenvalue(a: &DenseMatrix) -> GramEigen {
    let n = a.cols();
    let ones = vec![1.0; n];
    let first = power_run(a, ones);
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let random: Vec<f64> = (0..n).map(|_| splitmix_unit(&mut state)).collect();
    let second = power_run(a, random);
    let best = if second.value > first.value { second } else { first };
    GramEigen {
        value: best.value,
        iterations: first.iterations + second.iterations,
        converged: first.converged && second.converged,
    }
}

fn power_run(a: &DenseMatrix, mut x: Vec<f64>) -> GramEigen {
    let nrm = norm2(&x);
    if nrm == 0.0 {
        return GramEigen { value: 0.0, iterations: 0, converged: true };
    }
    scale_in_place(&mut x, 1.0 / nrm);
    let mut lambda_prev = f64::NAN;
    for it in 1..=POWER_MAX_ITER {
        let ax = a.matvec_unchecked(&x);
        let lambda = dot(&ax, &ax);
        if lambda == 0.0 {
            return GramEigen { value: 0.0, iterations: it, converged: true };
        }
        let mut y = a.matvec_t_unchecked(&ax);
        let ny = norm2(&y);
        scale_in_place(&mut y, 1.0 / ny);
        x = y;
        if (lambda - lambda_prev).abs() <= POWER_TOL * lambda {
            // Rayleigh quotient of the refreshed direction is never smaller.
            let ax = a.matvec_unchecked(&x);
            return GramEigen { value: dot(&ax, &ax).max(lambda), iterations: it, converged: true };
        }
        lambda_prev = lambda;
    }
    let ax = a.matvec_unchecked(&x);
    GramEigen { value: dot(&ax, &ax), iterations: POWER_MAX_ITER, converged: false }
}

/// Largest singular value.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    largest_gram_eigenvalue(a).value.sqrt()
}

/// Orthonormal basis of `{h : A h = 0}`.
pub fn kernel_basis(a: &DenseMatrix) -> SubspaceBasis {
    let (m, n) = (a.rows(), a.cols());
    // Zero-pad to square so the SVD yields a full set of right singular vectors.
    let size = m.max(n);
    let mut padded = DMatrix::<f64>::zeros(size, n);
    for r in 0..m {
        for c in 0..n {
            padded[(r, c)] = a.get(r, c);
        }
    }
    let svd = nalgebra::linalg::SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let tol = RANK_TOL * smax * size as f64;
    let vectors: Vec<Vec<f64>> = (0..sigma.len())
        .filter(|&i| sigma[i] <= tol)
        .map(|i| v_t.row(i).iter().copied().collect())
        .collect();
    SubspaceBasis { ambient: n, vectors }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_in_place(v: &mut [f64], s: f64) {
    v.iter_mut().for_each(|x| *x *= s);
}

/// Number of entries that are exactly nonzero.
pub fn support_size(v: &[f64]) -> usize {
    v.iter().filter(|x| **x != 0.0).count()
}

// Uniform in [-1, 1), used only for the deterministic restart direction.
fn splitmix_unit(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn example1() -> DenseMatrix {
        DenseMatrix::from_rows(&[[0.8, 0.0, 0.3], [0.0, 0.8, 0.3]]).unwrap()
    }

    #[test]
    fn matvec_examples() {
        let id = DenseMatrix::identity(3);
        assert_eq!(id.matvec(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let b = example1().matvec(&[0.0, 0.0, 2.0]).unwrap();
        assert_relative_eq!(b[0], 0.6, epsilon = 1e-15);
        assert_relative_eq!(b[1], 0.6, epsilon = 1e-15);
        assert_eq!(example1().matvec(&[0.0; 3]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(example1().matvec(&[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(matches!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]), Err(Error::NonFinite(1))));
        assert!(DenseMatrix::new(0, 2, vec![]).is_err());
        assert!(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn gram_eigenvalue_small_cases() {
        assert_relative_eq!(largest_gram_eigenvalue(&DenseMatrix::identity(2)).value, 1.0, max_relative = 1e-12);
        let a = DenseMatrix::from_rows(&[[2.0]]).unwrap();
        assert_relative_eq!(largest_gram_eigenvalue(&a).value, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn gram_eigenvalue_example1_matches_characteristic_cubic() {
        // Gram = [[.64,0,.24],[0,.64,.24],[.24,.24,.18]].
        // det(G − λI) = (.64 − λ)·[(.64 − λ)(.18 − λ) − 2·.0576]
        // so the roots are .64 and those of λ² − .82λ + (.1152 − .1152) = λ(λ − .82).
        // λmax = .82, computed here from the quadratic independently of the power method.
        let (b, c) = (-0.82f64, 0.64 * 0.18 - 2.0 * 0.24 * 0.24);
        let root = (-b + (b * b - 4.0 * c).sqrt()) / 2.0;
        assert_relative_eq!(root, 0.82, epsilon = 1e-15);
        let est = largest_gram_eigenvalue(&example1());
        assert!(est.converged);
        assert_relative_eq!(est.value, root.max(0.64), max_relative = 1e-8);
    }

    #[test]
    fn orthogonal_start_is_recovered() {
        // all-ones lies in the kernel of [1 -1]
        let a = DenseMatrix::from_rows(&[[1.0, -1.0]]).unwrap();
        assert_relative_eq!(largest_gram_eigenvalue(&a).value, 2.0, max_relative = 1e-10);
        // all-ones is an eigenvector of the smaller eigenvalue here
        let a = DenseMatrix::from_rows(&[[2.0, -2.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_relative_eq!(largest_gram_eigenvalue(&a).value, 8.0, max_relative = 1e-8);
    }

    #[test]
    fn spectral_norm_examples() {
        assert_relative_eq!(spectral_norm(&DenseMatrix::diagonal(&[3.0, -1.0])), 3.0, max_relative = 1e-10);
        assert_eq!(spectral_norm(&DenseMatrix::zeros(2, 3)), 0.0);
        let block = DenseMatrix::from_rows(&[[-0.36, 0.24], [0.24, -0.82]]).unwrap();
        assert!((spectral_norm(&block) - 0.9224).abs() < 5e-5);
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_basis(&example1());
        assert_eq!(k.dim(), 1);
        let v = &k.vectors()[0];
        let scale = v[2] / -1.0;
        for (vi, di) in v.iter().zip([0.375, 0.375, -1.0]) {
            assert_relative_eq!(*vi, di * scale, epsilon = 1e-12);
        }
        let inv = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]).unwrap();
        assert_eq!(kernel_basis(&inv).dim(), 0);
        let ex2 = DenseMatrix::from_rows(&[
            [0.75, -0.5, 0.375, 0.5, -0.25],
            [0.75, -0.5, -0.125, 0.5, 0.0],
            [0.0, 0.25, 0.375, -0.125, -0.375],
        ])
        .unwrap();
        assert_eq!(kernel_basis(&ex2).dim(), 2);
        assert_eq!(kernel_basis(&DenseMatrix::zeros(2, 3)).dim(), 3);
    }

    #[test]
    fn column_submatrix_examples() {
        let s = IndexSet::new(vec![0, 2], 3).unwrap();
        let sub = DenseMatrix::identity(3).column_submatrix(&s).unwrap();
        assert_eq!(sub, DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]).unwrap());
        assert_eq!(example1().column_submatrix(&IndexSet::full(3)).unwrap(), example1());
        let sub = example1().column_submatrix(&s).unwrap();
        assert_eq!(sub, DenseMatrix::from_rows(&[[0.8, 0.3], [0.0, 0.3]]).unwrap());
        assert!(example1().column_submatrix(&IndexSet::full(4)).is_err());
        assert!(matches!(IndexSet::new(vec![3], 3), Err(Error::IndexOutOfRange { index: 3, ambient: 3 })));
    }

    #[test]
    fn subsets_examples() {
        let s: Vec<Vec<usize>> = subsets(3, 1).map(|s| s.indices().to_vec()).collect();
        assert_eq!(s, vec![vec![0], vec![1], vec![2]]);
        let s: Vec<Vec<usize>> = subsets(3, 3).map(|s| s.indices().to_vec()).collect();
        assert_eq!(s, vec![vec![0, 1, 2]]);
        assert_eq!(subsets(5, 2).count(), 10);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(subsets(4, 0).count(), 1);
    }

    #[test]
    fn text_format_round_trip_and_errors() {
        let text = "2 3\n0.8 0 3e-1\n0 8.0e-1 0.3\n";
        let m = DenseMatrix::parse(text.as_bytes()).unwrap();
        assert_eq!(m, example1());
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        assert_eq!(DenseMatrix::parse(buf.as_slice()).unwrap(), m);
        let err = DenseMatrix::parse("2 2\n1 2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(DenseMatrix::parse("2 2\n1 2\n".as_bytes()).is_err());
        assert!(DenseMatrix::parse("1 1\nnan\n".as_bytes()).is_err());
    }

    fn matrix_strategy() -> impl Strategy<Value = DenseMatrix> {
        (1usize..6, 1usize..7).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-3.0f64..3.0, r * c)
                .prop_map(move |d| DenseMatrix::new(r, c, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn spectral_norm_dominates_random_directions(a in matrix_strategy(), seed in any::<u64>()) {
            let norm = spectral_norm(&a);
            let mut state = seed;
            let mut best: f64 = 0.0;
            for _ in 0..200 {
                let mut u: Vec<f64> = (0..a.cols()).map(|_| splitmix_unit(&mut state)).collect();
                let nu = norm2(&u);
                if nu == 0.0 { continue; }
                scale_in_place(&mut u, 1.0 / nu);
                best = best.max(norm2(&a.matvec(&u).unwrap()));
            }
            prop_assert!(norm >= best * (1.0 - 1e-6));
        }

        #[test]
        fn kernel_vectors_are_annihilated_and_orthonormal(a in matrix_strategy()) {
            let k = kernel_basis(&a);
            let anorm = spectral_norm(&a).max(1e-300);
            for (i, v) in k.vectors().iter().enumerate() {
                prop_assert!(norm2(&a.matvec(v).unwrap()) <= 1e-8 * anorm);
                for (j, w) in k.vectors().iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((dot(v, w) - expect).abs() <= 1e-10);
                }
            }
        }

        #[test]
        fn subsets_count_and_distinct(n in 0usize..9, k in 0usize..9) {
            prop_assume!(k <= n);
            let all: Vec<IndexSet> = subsets(n, k).collect();
            prop_assert_eq!(all.len() as u128, binomial(n, k));
            let uniq: std::collections::BTreeSet<_> = all.iter().cloned().collect();
            prop_assert_eq!(uniq.len(), all.len());
        }

        #[test]
        fn matvec_is_additive(a in matrix_strategy(), seed in any::<u64>()) {
            let mut state = seed;
            let x: Vec<f64> = (0..a.cols()).map(|_| splitmix_unit(&mut state)).collect();
            let y: Vec<f64> = (0..a.cols()).map(|_| splitmix_unit(&mut state)).collect();
            let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
            let lhs = a.matvec(&xy).unwrap();
            let ax = a.matvec(&x).unwrap();
            let ay = a.matvec(&y).unwrap();
            for i in 0..lhs.len() {
                let rhs = ax[i] + ay[i];
                prop_assert!((lhs[i] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs().max(lhs[i].abs())) * a.cols() as f64);
            }
        }
    }
}
