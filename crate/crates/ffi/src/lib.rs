//! C ABI over the `wl1` toolkit.
//!
//! Every entry point returns a [`Wl1Status`]. On anything other than
//! `WL1_STATUS_OK` a human-readable message is stored per thread and can be
//! copied out with [`wl1_last_error_message`]. Matrices cross the boundary as
//! opaque [`Wl1Matrix`] handles built from row-major data and released with
//! [`wl1_matrix_free`]. Output buffers are caller-owned; their lengths are
//! passed alongside and checked.
//!
//! The generated header lives at `include/wl1.h`.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the stated number of entries,
//! and matrix handles must come from this library and not yet be freed.
//! Handles are immutable after construction and may be shared across threads.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use wl1::certificates::{self, RicBudget};
use wl1::linops::DenseMatrix;
use wl1::solver::{self, SolverConfig, WeightScheme};
use wl1::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wl1Status {
    Ok = 0,
    NullPointer = 1,
    Dimension = 2,
    InvalidArgument = 3,
    NonFinite = 4,
    IndexOutOfRange = 5,
    TrivialKernel = 6,
    EnumerationCap = 7,
    Infeasible = 8,
    Parse = 9,
    Io = 10,
    Internal = 11,
    /// The solver hit its inner iteration cap in some stage. The output is
    /// still written.
    NotConverged = 12,
    Panic = 13,
}

/// Opaque dense matrix.
pub struct Wl1Matrix(DenseMatrix);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct Wl1NspResult {
    pub holds: bool,
    /// The kernel is trivial, so the property holds without any vertex to check.
    pub vacuous: bool,
    /// Largest top-k mass over section vertices minus one half.
    pub worst_margin: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct Wl1T0Result {
    pub value: f64,
    pub second_value: f64,
    pub unique: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct Wl1GammaInterval {
    pub lo: f64,
    pub hi_wnsp: f64,
    /// NaN when no RIC budget was supplied.
    pub hi_ric: f64,
    pub feasible: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wl1Scheme {
    Identity = 0,
    Classic = 1,
    NullspaceGuided = 2,
    Fixed = 3,
}

/// Plain-data subset of the solver settings. The initial point is all ones.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct Wl1SolverConfig {
    pub stages: usize,
    pub mu_decay: f64,
    pub eta_factor: f64,
    pub inner_cap: usize,
    pub l_inflation: f64,
}

impl From<Wl1SolverConfig> for SolverConfig {
    fn from(c: Wl1SolverConfig) -> Self {
        SolverConfig {
            stages: c.stages,
            mu_decay: c.mu_decay,
            eta_factor: c.eta_factor,
            inner_cap: c.inner_cap,
            l_inflation: c.l_inflation,
            ..SolverConfig::default()
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(Wl1Status, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Dimension(_) => Wl1Status::Dimension,
            Error::InvalidArgument(_) => Wl1Status::InvalidArgument,
            Error::NonFinite(_) => Wl1Status::NonFinite,
            Error::IndexOutOfRange { .. } => Wl1Status::IndexOutOfRange,
            Error::TrivialKernel => Wl1Status::TrivialKernel,
            Error::EnumerationCap { .. } => Wl1Status::EnumerationCap,
            Error::Infeasible => Wl1Status::Infeasible,
            Error::Internal(_) => Wl1Status::Internal,
            Error::Parse { .. } => Wl1Status::Parse,
            Error::Io(_) => Wl1Status::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(Wl1Status::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<Wl1Status, Failure>) -> Wl1Status {
    let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure(Wl1Status::Panic, msg))
    });
    let (status, msg) = match outcome {
        Ok(status) => (status, String::new()),
        Err(Failure(status, msg)) => (status, msg),
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

unsafe fn matrix<'a>(m: *const Wl1Matrix) -> Result<&'a DenseMatrix, Failure> {
    m.as_ref().map(|m| &m.0).ok_or_else(|| null("matrix"))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, need: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len < need {
        return Err(Failure(Wl1Status::Dimension, format!("{what} holds {len} entries, need {need}")));
    }
    if need == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length in bytes
/// excluding the terminator. `buf` may be null to query the length.
#[no_mangle]
pub unsafe extern "C" fn wl1_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a matrix from `rows * cols` row-major entries.
#[no_mangle]
pub unsafe extern "C" fn wl1_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut Wl1Matrix,
) -> Wl1Status {
    guard(|| {
        let len = rows.checked_mul(cols).ok_or_else(|| Failure(Wl1Status::Dimension, "size overflow".into()))?;
        let data = input(data, len, "data")?;
        let m = DenseMatrix::new(rows, cols, data.to_vec())?;
        write(out, Box::into_raw(Box::new(Wl1Matrix(m))), "out")?;
        Ok(Wl1Status::Ok)
    })
}

/// Reads a whitespace-separated matrix file (first line `rows cols`, `#` comments).
#[no_mangle]
pub unsafe extern "C" fn wl1_matrix_read(path: *const c_char, out: *mut *mut Wl1Matrix) -> Wl1Status {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(Wl1Status::InvalidArgument, "path is not valid UTF-8".into()))?;
        let m = DenseMatrix::read_file(Path::new(path))?;
        write(out, Box::into_raw(Box::new(Wl1Matrix(m))), "out")?;
        Ok(Wl1Status::Ok)
    })
}

/// Releases a matrix. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn wl1_matrix_free(m: *mut Wl1Matrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Row count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn wl1_matrix_rows(m: *const Wl1Matrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

/// Column count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn wl1_matrix_cols(m: *const Wl1Matrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// Exact restricted isometry constant of order `k`. When `out_set` is non-null
/// it receives the `k` 0-based column indices attaining the value.
#[no_mangle]
pub unsafe extern "C" fn wl1_ric(
    m: *const Wl1Matrix,
    k: usize,
    cap: u64,
    out_value: *mut f64,
    out_set: *mut usize,
    set_len: usize,
) -> Wl1Status {
    guard(|| {
        let r = certificates::compute_ric(matrix(m)?, k, cap as u128)?;
        if !out_set.is_null() {
            output(out_set, set_len, r.attained_at.len(), "out_set")?[..r.attained_at.len()]
                .copy_from_slice(r.attained_at.indices());
        }
        write(out_value, r.value, "out_value")?;
        Ok(Wl1Status::Ok)
    })
}

/// Exact restricted orthogonality constant of orders `(k1, k2)`.
#[no_mangle]
pub unsafe extern "C" fn wl1_roc(
    m: *const Wl1Matrix,
    k1: usize,
    k2: usize,
    cap: u64,
    out_value: *mut f64,
) -> Wl1Status {
    guard(|| {
        let r = certificates::compute_roc(matrix(m)?, k1, k2, cap as u128)?;
        write(out_value, r.value, "out_value")?;
        Ok(Wl1Status::Ok)
    })
}

/// Null space property of order `k`, weighted when `weights` is non-null
/// (`cols` entries in (0, 1]). When `out_witness` is non-null and the property
/// fails it receives the violating unit-ℓ1 kernel vector (`cols` entries);
/// otherwise it is zero-filled.
#[no_mangle]
pub unsafe extern "C" fn wl1_check_nsp(
    m: *const Wl1Matrix,
    weights: *const f64,
    k: usize,
    out: *mut Wl1NspResult,
    out_witness: *mut f64,
    witness_len: usize,
) -> Wl1Status {
    guard(|| {
        let phi = matrix(m)?;
        let n = phi.cols();
        let report = if weights.is_null() {
            certificates::check_nsp(phi, k)?
        } else {
            certificates::check_wnsp(phi, input(weights, n, "weights")?, k)?
        };
        if !out_witness.is_null() {
            let buf = &mut output(out_witness, witness_len, n, "out_witness")?[..n];
            match &report.witness {
                Some(w) => buf.copy_from_slice(&w.vertex),
                None => buf.fill(0.0),
            }
        }
        let result = Wl1NspResult { holds: report.holds, vacuous: report.vacuous, worst_margin: report.worst_margin };
        write(out, result, "out")?;
        Ok(Wl1Status::Ok)
    })
}

/// Maximal concentration set `T₀` of size `k` over unit-ℓ1 kernel vectors.
/// `out_set` (nullable) receives its `k` 0-based indices.
#[no_mangle]
pub unsafe extern "C" fn wl1_t0(
    m: *const Wl1Matrix,
    k: usize,
    out: *mut Wl1T0Result,
    out_set: *mut usize,
    set_len: usize,
) -> Wl1Status {
    guard(|| {
        let t = certificates::compute_t0(matrix(m)?, k)?;
        if !out_set.is_null() {
            output(out_set, set_len, t.t0.len(), "out_set")?[..t.t0.len()].copy_from_slice(t.t0.indices());
        }
        write(out, Wl1T0Result { value: t.value, second_value: t.second_value, unique: t.unique }, "out")?;
        Ok(Wl1Status::Ok)
    })
}

/// Admissible down-weights on `T₀`. Pass `ric_a <= 0` to skip the RIC route;
/// otherwise `ric_delta` is a measured `δ_{ak}`.
#[no_mangle]
pub unsafe extern "C" fn wl1_gamma_interval(
    m: *const Wl1Matrix,
    k: usize,
    ric_a: f64,
    ric_delta: f64,
    out: *mut Wl1GammaInterval,
) -> Wl1Status {
    guard(|| {
        let budget = (ric_a > 0.0).then_some(RicBudget { a: ric_a, delta: ric_delta });
        let g = certificates::gamma_interval(matrix(m)?, k, budget)?;
        let result = Wl1GammaInterval {
            lo: g.lo,
            hi_wnsp: g.hi_wnsp,
            hi_ric: g.hi_ric.unwrap_or(f64::NAN),
            feasible: g.feasible,
        };
        write(out, result, "out")?;
        Ok(Wl1Status::Ok)
    })
}

/// Exact weighted ℓ1 minimizer subject to `Φx = b` by linear programming.
/// A null `weights` means all ones.
#[no_mangle]
pub unsafe extern "C" fn wl1_l1_min_exact(
    m: *const Wl1Matrix,
    b: *const f64,
    b_len: usize,
    weights: *const f64,
    out_x: *mut f64,
    x_len: usize,
) -> Wl1Status {
    guard(|| {
        let phi = matrix(m)?;
        let n = phi.cols();
        let b = input(b, b_len, "b")?;
        let ones;
        let w = if weights.is_null() {
            ones = vec![1.0; n];
            &ones[..]
        } else {
            input(weights, n, "weights")?
        };
        let x = certificates::l1_min_exact(phi, b, w)?;
        output(out_x, x_len, n, "out_x")?[..n].copy_from_slice(&x);
        Ok(Wl1Status::Ok)
    })
}

#[no_mangle]
pub extern "C" fn wl1_solver_config_default() -> Wl1SolverConfig {
    let c = SolverConfig::default();
    Wl1SolverConfig {
        stages: c.stages,
        mu_decay: c.mu_decay,
        eta_factor: c.eta_factor,
        inner_cap: c.inner_cap,
        l_inflation: c.l_inflation,
    }
}

/// Continuation solver. `scheme` is a `Wl1Scheme` value. `q` and `eps` apply to the classic and null-space-guided
/// schemes; `weights` (`cols` entries) to the fixed scheme only. A null
/// `config` uses the defaults. Returns `WL1_STATUS_NOT_CONVERGED` with `out_x`
/// filled when some stage hit its iteration cap.
#[no_mangle]
pub unsafe extern "C" fn wl1_solve(
    m: *const Wl1Matrix,
    b: *const f64,
    b_len: usize,
    scheme: i32,
    q: f64,
    eps: f64,
    weights: *const f64,
    config: *const Wl1SolverConfig,
    out_x: *mut f64,
    x_len: usize,
) -> Wl1Status {
    guard(|| {
        let phi = matrix(m)?;
        let n = phi.cols();
        let b = input(b, b_len, "b")?;
        let scheme = match scheme {
            s if s == Wl1Scheme::Identity as i32 => WeightScheme::Identity,
            s if s == Wl1Scheme::Classic as i32 => WeightScheme::Classic { q, eps },
            s if s == Wl1Scheme::NullspaceGuided as i32 => WeightScheme::NullspaceGuided { q, eps },
            s if s == Wl1Scheme::Fixed as i32 => {
                WeightScheme::Fixed { weights: input(weights, n, "weights")?.to_vec() }
            }
            other => return Err(Failure(Wl1Status::InvalidArgument, format!("unknown scheme {other}"))),
        };
        let config = config.as_ref().map_or_else(SolverConfig::default, |c| (*c).into());
        let report = solver::solve(phi, b, &scheme, &config)?;
        output(out_x, x_len, n, "out_x")?[..n].copy_from_slice(&report.x);
        Ok(if report.converged() { Wl1Status::Ok } else { Wl1Status::NotConverged })
    })
}

/// Largest `δ_{ak}` that still guarantees weighted recovery with down-weight `γ`.
#[no_mangle]
pub unsafe extern "C" fn wl1_weighted_ric_bound(a: f64, gamma: f64, out: *mut f64) -> Wl1Status {
    guard(|| {
        write(out, certificates::weighted_ric_bound(a, gamma)?, "out")?;
        Ok(Wl1Status::Ok)
    })
}

/// Largest `δ_k` that still guarantees weighted recovery of order `k` with down-weight `γ`.
#[no_mangle]
pub unsafe extern "C" fn wl1_weighted_ric_bound_order_k(k: usize, gamma: f64, out: *mut f64) -> Wl1Status {
    guard(|| {
        write(out, certificates::weighted_ric_bound_order_k(k, gamma)?, "out")?;
        Ok(Wl1Status::Ok)
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wl1_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
