//! C ABI for the lowercs library.
//!
//! Every object crosses the boundary as an opaque handle created and
//! released by paired `*_new`/`*_free` calls; every fallible function
//! returns an [`LcsStatus`] and writes its result through out-pointers.
//! The most recent error message of the calling thread is available via
//! [`lcs_last_error`]. The committed header `include/lowercs.h` mirrors
//! this surface.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use lowercs::analysis::{empirical_rip, sample_bound_standard, ComplexityQuery, RipMode};
use lowercs::error::Error;
use lowercs::multiindex::{hyperbolic_cross, is_lower, IndexSet, MultiIndex};
use lowercs::orthopoly::{k_of_s, k_of_set, theta, weight, BasisKind, WeightVector};
use lowercs::sensing::{build_system, draw_samples, SampleSet, SensingSystem};
use lowercs::solvers::{
    lower_iht, weighted_bpdn, BPDNConfig, IhtOptions, RecoveryReport, ThresholdMode, WeightMode,
};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericError = 3,
    Panic = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> LcsStatus {
    match err {
        Error::Domain(_) | Error::Shape(_) | Error::Precondition(_) | Error::Usage(_) => {
            LcsStatus::InvalidArgument
        }
        Error::Size(_) | Error::Accuracy(_) | Error::Data(_) | Error::Convergence(_) => {
            LcsStatus::NumericError
        }
    }
}

fn fail(err: Error) -> LcsStatus {
    let code = status_of(&err);
    set_error(err.to_string());
    code
}

/// Runs `body` behind a panic guard, translating panics into a status.
fn guarded(body: impl FnOnce() -> LcsStatus) -> LcsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            LcsStatus::Panic
        }
    }
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`); returns the full message length.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null (query mode).
#[no_mangle]
pub unsafe extern "C" fn lcs_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

fn kind_of(tag: u32) -> Result<BasisKind, Error> {
    match tag {
        0 => Ok(BasisKind::Legendre),
        1 => Ok(BasisKind::Chebyshev),
        other => Err(Error::Usage(format!("unknown basis kind tag {other}"))),
    }
}

/// Opaque index-set handle.
pub struct LcsIndexSet(IndexSet);
/// Opaque sample-set handle.
pub struct LcsSampleSet(SampleSet);
/// Opaque sensing-system handle.
pub struct LcsSensingSystem(SensingSystem);
/// Opaque recovery-report handle.
pub struct LcsRecoveryReport(RecoveryReport);

macro_rules! free_fn {
    ($name:ident, $ty:ty) => {
        /// Releases a handle; null is ignored.
        ///
        /// # Safety
        /// `handle` must be a pointer returned by this library and not
        /// already freed.
        #[no_mangle]
        pub unsafe extern "C" fn $name(handle: *mut $ty) {
            if !handle.is_null() {
                drop(unsafe { Box::from_raw(handle) });
            }
        }
    };
}

free_fn!(lcs_index_set_free, LcsIndexSet);
free_fn!(lcs_sample_set_free, LcsSampleSet);
free_fn!(lcs_system_free, LcsSensingSystem);
free_fn!(lcs_report_free, LcsRecoveryReport);

/// Builds the hyperbolic cross H_s in dimension d.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lcs_hyperbolic_cross(
    s: usize,
    d: usize,
    out: *mut *mut LcsIndexSet,
) -> LcsStatus {
    guarded(|| {
        if out.is_null() {
            return LcsStatus::NullPointer;
        }
        match hyperbolic_cross(s, d) {
            Ok(set) => {
                unsafe { *out = Box::into_raw(Box::new(LcsIndexSet(set))) };
                LcsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parses an index set from the line-oriented text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lcs_index_set_from_text(
    text: *const c_char,
    out: *mut *mut LcsIndexSet,
) -> LcsStatus {
    guarded(|| {
        if text.is_null() || out.is_null() {
            return LcsStatus::NullPointer;
        }
        let text = match unsafe { CStr::from_ptr(text) }.to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("text is not valid UTF-8");
                return LcsStatus::InvalidArgument;
            }
        };
        match IndexSet::from_text(text) {
            Ok(set) => {
                unsafe { *out = Box::into_raw(Box::new(LcsIndexSet(set))) };
                LcsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Serializes an index set; call with a null buffer to query the length
/// (excluding the NUL terminator).
///
/// # Safety
/// `set` must be a live handle; `buf`, when non-null, must point to `len`
/// writable bytes; `needed` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_index_set_to_text(
    set: *const LcsIndexSet,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> LcsStatus {
    guarded(|| {
        if set.is_null() || needed.is_null() {
            return LcsStatus::NullPointer;
        }
        let text = unsafe { &(*set).0 }.to_text();
        let bytes = text.as_bytes();
        unsafe { *needed = bytes.len() };
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
        }
        LcsStatus::Ok
    })
}

/// # Safety
/// `set` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_index_set_len(set: *const LcsIndexSet, out: *mut usize) -> LcsStatus {
    guarded(|| {
        if set.is_null() || out.is_null() {
            return LcsStatus::NullPointer;
        }
        unsafe { *out = (*set).0.len() };
        LcsStatus::Ok
    })
}

/// # Safety
/// `set` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_index_set_dim(set: *const LcsIndexSet, out: *mut usize) -> LcsStatus {
    guarded(|| {
        if set.is_null() || out.is_null() {
            return LcsStatus::NullPointer;
        }
        unsafe { *out = (*set).0.dim() };
        LcsStatus::Ok
    })
}

/// Writes 1 when the set is downward closed, 0 otherwise.
///
/// # Safety
/// `set` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_index_set_is_lower(
    set: *const LcsIndexSet,
    out: *mut i32,
) -> LcsStatus {
    guarded(|| {
        if set.is_null() || out.is_null() {
            return LcsStatus::NullPointer;
        }
        unsafe { *out = is_lower(&(*set).0) as i32 };
        LcsStatus::Ok
    })
}

/// Sup-norm weight ω_ν of one multi-index (kind: 0 Legendre, 1 Chebyshev).
///
/// # Safety
/// `degrees` must point to `dim` readable u32 values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_weight(
    kind: u32,
    degrees: *const u32,
    dim: usize,
    out: *mut f64,
) -> LcsStatus {
    guarded(|| {
        if degrees.is_null() || out.is_null() {
            return LcsStatus::NullPointer;
        }
        let kind = match kind_of(kind) {
            Ok(k) => k,
            Err(e) => return fail(e),
        };
        let degs = unsafe { std::slice::from_raw_parts(degrees, dim) }.to_vec();
        match MultiIndex::new(degs) {
            Ok(nu) => {
                unsafe { *out = weight(kind, &nu) };
                LcsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// K(Λ) = Σ ω_ν² of a set.
///
/// # Safety
/// `set` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_k_of_set(
    kind: u32,
    set: *const LcsIndexSet,
    out: *mut f64,
) -> LcsStatus {
    guarded(|| {
        if set.is_null() || out.is_null() {
            return LcsStatus::NullPointer;
        }
        let kind = match kind_of(kind) {
            Ok(k) => k,
            Err(e) => return fail(e),
        };
        match k_of_set(kind, unsafe { &(*set).0 }) {
            Ok(v) => {
                unsafe { *out = v };
                LcsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Exact K(s) over lower subsets of H_s (budget 0 uses the default).
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_k_of_s(
    kind: u32,
    s: usize,
    d: usize,
    budget: usize,
    out: *mut f64,
) -> LcsStatus {
    guarded(|| {
        if out.is_null() {
            return LcsStatus::NullPointer;
        }
        let kind = match kind_of(kind) {
            Ok(k) => k,
            Err(e) => return fail(e),
        };
        let budget = (budget > 0).then_some(budget);
        match k_of_s(kind, s, d, budget) {
            Ok(v) => {
                unsafe { *out = v };
                LcsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Θ = max ω_ν over a set.
///
/// # Safety
/// `set` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_theta(kind: u32, set: *const LcsIndexSet, out: *mut f64) -> LcsStatus {
    guarded(|| {
        if set.is_null() || out.is_null() {
            return LcsStatus::NullPointer;
        }
        let kind = match kind_of(kind) {
            Ok(k) => k,
            Err(e) => return fail(e),
        };
        match theta(kind, unsafe { &(*set).0 }) {
            Ok(v) => {
                unsafe { *out = v };
                LcsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Sufficient sample count of the RIP guarantees; `driver` is Θ²s for the
/// standard bound and K(s) for the lower one (identical formula shape).
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_sample_bound(
    driver: f64,
    delta: f64,
    gamma: f64,
    n: usize,
    out: *mut f64,
) -> LcsStatus {
    guarded(|| {
        if out.is_null() {
            return LcsStatus::NullPointer;
        }
        let query = ComplexityQuery {
            theta_sq_s_or_ks: driver,
            delta,
            gamma,
            n,
        };
        match sample_bound_standard(&query) {
            Ok(v) => {
                unsafe { *out = v };
                LcsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Draws m i.i.d. samples from the orthogonalization measure.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_draw_samples(
    kind: u32,
    d: usize,
    m: usize,
    seed: u64,
    out: *mut *mut LcsSampleSet,
) -> LcsStatus {
    guarded(|| {
        if out.is_null() {
            return LcsStatus::NullPointer;
        }
        let kind = match kind_of(kind) {
            Ok(k) => k,
            Err(e) => return fail(e),
        };
        match draw_samples(kind, d, m, seed) {
            Ok(samples) => {
                unsafe { *out = Box::into_raw(Box::new(LcsSampleSet(samples))) };
                LcsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Black-box target function: given the point and a caller context, return
/// the observation value.
pub type LcsTargetFn = unsafe extern "C" fn(point: *const f64, dim: usize, ctx: *mut c_void) -> f64;

/// Assembles the normalized sensing system A = Ψ/√m, g̃ = g/√m.
///
/// # Safety
/// All handles must be live, `g` must be callable with `ctx` for the whole
/// call, and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_build_system(
    kind: u32,
    set: *const LcsIndexSet,
    samples: *const LcsSampleSet,
    g: LcsTargetFn,
    ctx: *mut c_void,
    eta: f64,
    out: *mut *mut LcsSensingSystem,
) -> LcsStatus {
    guarded(|| {
        if set.is_null() || samples.is_null() || out.is_null() {
            return LcsStatus::NullPointer;
        }
        let kind = match kind_of(kind) {
            Ok(k) => k,
            Err(e) => return fail(e),
        };
        let closure = |y: &[f64]| unsafe { g(y.as_ptr(), y.len(), ctx) };
        match build_system(
            kind,
            unsafe { &(*set).0 },
            unsafe { &(*samples).0 },
            closure,
            eta,
        ) {
            Ok(system) => {
                unsafe { *out = Box::into_raw(Box::new(LcsSensingSystem(system))) };
                LcsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Weighted ℓ1 basis-pursuit denoising. `weight_pow` selects the weights:
/// 0 for unit, p ≥ 1 for the p-th power of the sup-norm weights.
///
/// # Safety
/// `system` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_weighted_bpdn(
    system: *const LcsSensingSystem,
    weight_pow: u32,
    tolerance: f64,
    max_iterations: usize,
    out: *mut *mut LcsRecoveryReport,
) -> LcsStatus {
    guarded(|| {
        if system.is_null() || out.is_null() {
            return LcsStatus::NullPointer;
        }
        let system = unsafe { &(*system).0 };
        let mode = match weight_pow {
            0 => WeightMode::Unit,
            1 => WeightMode::SupNorm,
            p => WeightMode::SupNormPow(p),
        };
        let weights = match mode.resolve(system.kind(), system.index_set()) {
            Ok(w) => w,
            Err(e) => return fail(e),
        };
        let config = BPDNConfig {
            tolerance,
            max_iterations,
            weight_mode: mode,
            ..BPDNConfig::default()
        };
        match weighted_bpdn(system, &weights, &config) {
            Ok(report) => {
                unsafe { *out = Box::into_raw(Box::new(LcsRecoveryReport(report))) };
                LcsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Lower iterative hard thresholding (mode: 0 exact, 1 greedy, 2 auto).
///
/// # Safety
/// `system` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_lower_iht(
    system: *const LcsSensingSystem,
    s: usize,
    mode: u32,
    max_iterations: usize,
    tolerance: f64,
    out: *mut *mut LcsRecoveryReport,
) -> LcsStatus {
    guarded(|| {
        if system.is_null() || out.is_null() {
            return LcsStatus::NullPointer;
        }
        let mode = match mode {
            0 => ThresholdMode::Exact,
            1 => ThresholdMode::Greedy,
            2 => ThresholdMode::Auto,
            other => {
                set_error(format!("unknown threshold mode {other}"));
                return LcsStatus::InvalidArgument;
            }
        };
        let opts = IhtOptions {
            mode,
            max_iterations,
            tolerance,
            ..IhtOptions::default()
        };
        match lower_iht(unsafe { &(*system).0 }, s, &opts) {
            Ok(result) => {
                unsafe { *out = Box::into_raw(Box::new(LcsRecoveryReport(result.report))) };
                LcsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Empirical RIP constant (mode: 0 standard, 1 lower, 2 K-constrained).
///
/// # Safety
/// `system` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_empirical_rip(
    system: *const LcsSensingSystem,
    s: usize,
    mode: u32,
    budget: usize,
    delta_hat: *mut f64,
    supports_examined: *mut usize,
) -> LcsStatus {
    guarded(|| {
        if system.is_null() || delta_hat.is_null() || supports_examined.is_null() {
            return LcsStatus::NullPointer;
        }
        let mode = match mode {
            0 => RipMode::Standard,
            1 => RipMode::LowerCardinality,
            2 => RipMode::KConstrained,
            other => {
                set_error(format!("unknown rip mode {other}"));
                return LcsStatus::InvalidArgument;
            }
        };
        let budget = (budget > 0).then_some(budget);
        match empirical_rip(unsafe { &(*system).0 }, s, mode, budget) {
            Ok(est) => {
                unsafe {
                    *delta_hat = est.delta_hat;
                    *supports_examined = est.supports_examined;
                }
                LcsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of coefficients of a recovery report.
///
/// # Safety
/// `report` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_report_len(
    report: *const LcsRecoveryReport,
    out: *mut usize,
) -> LcsStatus {
    guarded(|| {
        if report.is_null() || out.is_null() {
            return LcsStatus::NullPointer;
        }
        unsafe { *out = (*report).0.coefficients.len() };
        LcsStatus::Ok
    })
}

/// Copies the recovered coefficients (canonical index order) into `buf`.
///
/// # Safety
/// `report` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lcs_report_coefficients(
    report: *const LcsRecoveryReport,
    buf: *mut f64,
    len: usize,
) -> LcsStatus {
    guarded(|| {
        if report.is_null() || buf.is_null() {
            return LcsStatus::NullPointer;
        }
        let values = unsafe { (*report).0.coefficients.values() };
        if len < values.len() {
            set_error(format!("buffer holds {len} of {} values", values.len()));
            return LcsStatus::InvalidArgument;
        }
        unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len()) };
        LcsStatus::Ok
    })
}

/// Scalar diagnostics of a recovery report; null out-pointers are skipped.
///
/// # Safety
/// `report` must be a live handle; non-null out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lcs_report_stats(
    report: *const LcsRecoveryReport,
    residual_norm: *mut f64,
    objective: *mut f64,
    iterations: *mut usize,
    converged: *mut i32,
) -> LcsStatus {
    guarded(|| {
        if report.is_null() {
            return LcsStatus::NullPointer;
        }
        let r = unsafe { &(*report).0 };
        unsafe {
            if !residual_norm.is_null() {
                *residual_norm = r.residual_norm;
            }
            if !objective.is_null() {
                *objective = r.objective;
            }
            if !iterations.is_null() {
                *iterations = r.iterations;
            }
            if !converged.is_null() {
                *converged = r.converged as i32;
            }
        }
        LcsStatus::Ok
    })
}

/// Sup-norm weight vector of a set, for callers building custom solvers.
///
/// # Safety
/// `set` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lcs_sup_norm_weights(
    kind: u32,
    set: *const LcsIndexSet,
    buf: *mut f64,
    len: usize,
) -> LcsStatus {
    guarded(|| {
        if set.is_null() || buf.is_null() {
            return LcsStatus::NullPointer;
        }
        let kind = match kind_of(kind) {
            Ok(k) => k,
            Err(e) => return fail(e),
        };
        let set = unsafe { &(*set).0 };
        if len < set.len() {
            set_error(format!("buffer holds {len} of {} values", set.len()));
            return LcsStatus::InvalidArgument;
        }
        let weights = WeightVector::sup_norm(kind, set);
        unsafe { std::ptr::copy_nonoverlapping(weights.values().as_ptr(), buf, set.len()) };
        LcsStatus::Ok
    })
}
