//! C ABI over the `mopm` estimators and planners.
//!
//! Conventions:
//!
//! - every fallible function returns a [`MopmStatus`] and writes its result
//!   through an out-pointer, which is left untouched on failure;
//! - on failure, [`mopm_last_error_message`] returns a description valid
//!   until the next call on the same thread;
//! - samples and kernels are opaque handles created by `*_new` functions and
//!   released with the matching `*_free`;
//! - panics are caught at the boundary and reported as
//!   [`MopmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mopm::bounds::{self, EstimatorKind, EstimatorPlan};
use mopm::kernels::{complete_ustat, Kernel, VarianceKernel};
use mopm::mean_estimators::{median, mom, morm};
use mopm::sampling::{PairScheme, Resampling};
use mopm::ustat_estimators::{moiu, mom_on_split_pairs, moru, mou};
use mopm::{Error, Sample, Seed};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MopmStatus {
    Ok = 0,
    InvalidArgument = 1,
    InsufficientData = 2,
    OutOfRange = 3,
    NullPointer = 4,
    Panic = 5,
    Internal = 6,
}

/// Block-drawing scheme: without (`SWOR`) or with (`MC`) replacement.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MopmScheme {
    Swor = 0,
    Mc = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MopmEstimator {
    Mom = 0,
    Morm = 1,
    Mou = 2,
    Moru = 3,
    MomSplitPairs = 4,
    Moiu = 5,
    Mogu = 6,
    Morgu = 7,
}

/// Planner output. `tau` is NaN when the estimator has none, `m` is 0
/// except for MoIU, and `radius` is meaningful only when `has_radius`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MopmPlan {
    pub estimator: MopmEstimator,
    pub n: usize,
    pub delta: f64,
    pub tau: f64,
    pub k: usize,
    pub b: usize,
    pub m: usize,
    pub has_radius: bool,
    pub radius: f64,
}

/// Opaque sample of `n` points in dimension `dim`.
pub struct MopmSample(Sample);

/// Kernel callback: `h(x, y)` for two points of dimension `dim`. Must be
/// symmetric and must not unwind.
pub type MopmKernelFn =
    Option<unsafe extern "C" fn(x: *const f64, y: *const f64, dim: usize, ctx: *mut c_void) -> f64>;

enum KernelImpl {
    Variance,
    Callback {
        f: unsafe extern "C" fn(*const f64, *const f64, usize, *mut c_void) -> f64,
        ctx: *mut c_void,
    },
}

/// Opaque pairwise kernel.
pub struct MopmKernel(KernelImpl);

impl Kernel for MopmKernel {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.0 {
            KernelImpl::Variance => VarianceKernel.eval(x, y),
            // SAFETY: the caller of `mopm_kernel_new_callback` guarantees that
            // `f` is valid for points of the sample dimension.
            KernelImpl::Callback { f, ctx } => unsafe { f(x.as_ptr(), y.as_ptr(), x.len(), ctx) },
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (MopmStatus, String);

fn status_of(e: &Error) -> MopmStatus {
    match e {
        Error::InvalidArgument(_) | Error::Parse { .. } => MopmStatus::InvalidArgument,
        Error::InsufficientData(_) => MopmStatus::InsufficientData,
        Error::OutOfRange(_) => MopmStatus::OutOfRange,
        _ => MopmStatus::Internal,
    }
}

fn fail(e: Error) -> Failure {
    (status_of(&e), e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MopmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MopmStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            MopmStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    (MopmStatus::NullPointer, format!("{name} is NULL"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

fn estimator_of(kind: EstimatorKind) -> MopmEstimator {
    match kind {
        EstimatorKind::Mom => MopmEstimator::Mom,
        EstimatorKind::Morm => MopmEstimator::Morm,
        EstimatorKind::Mou => MopmEstimator::Mou,
        EstimatorKind::Moru => MopmEstimator::Moru,
        EstimatorKind::MomSplitPairs => MopmEstimator::MomSplitPairs,
        EstimatorKind::Moiu => MopmEstimator::Moiu,
        EstimatorKind::Mogu => MopmEstimator::Mogu,
        EstimatorKind::Morgu => MopmEstimator::Morgu,
    }
}

fn plan_of(p: EstimatorPlan) -> MopmPlan {
    MopmPlan {
        estimator: estimator_of(p.estimator),
        n: p.n,
        delta: p.delta,
        tau: p.tau.unwrap_or(f64::NAN),
        k: p.k,
        b: p.b,
        m: p.m.unwrap_or(0),
        has_radius: p.radius.is_some(),
        radius: p.radius.unwrap_or(f64::NAN),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mopm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL.
#[no_mangle]
pub extern "C" fn mopm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copy `n * dim` row-major values into a new sample.
///
/// # Safety
/// `data` must point to `n * dim` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_sample_new(
    data: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut MopmSample,
) -> MopmStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let len = n
            .checked_mul(dim)
            .ok_or_else(|| (MopmStatus::InvalidArgument, "n * dim overflows".to_string()))?;
        let values = std::slice::from_raw_parts(data, len).to_vec();
        let sample = Sample::from_flat(dim, values).map_err(fail)?;
        write(out, Box::into_raw(Box::new(MopmSample(sample))))
    })
}

/// # Safety
/// `sample` must be NULL or a handle from [`mopm_sample_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mopm_sample_free(sample: *mut MopmSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Number of points, or 0 for NULL.
///
/// # Safety
/// `sample` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mopm_sample_len(sample: *const MopmSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.len())
}

/// The variance kernel `|x - y|^2 / 2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_kernel_new_variance(out: *mut *mut MopmKernel) -> MopmStatus {
    guard(|| write(out, Box::into_raw(Box::new(MopmKernel(KernelImpl::Variance)))))
}

/// A kernel calling `f(x, y, dim, ctx)`.
///
/// # Safety
/// `f` must stay callable with `ctx` for the lifetime of the kernel, and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_kernel_new_callback(
    f: MopmKernelFn,
    ctx: *mut c_void,
    out: *mut *mut MopmKernel,
) -> MopmStatus {
    guard(|| {
        let f = f.ok_or_else(|| null("f"))?;
        write(
            out,
            Box::into_raw(Box::new(MopmKernel(KernelImpl::Callback { f, ctx }))),
        )
    })
}

/// # Safety
/// `kernel` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mopm_kernel_free(kernel: *mut MopmKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Lower median of `n` values.
///
/// # Safety
/// `values` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_median(values: *const f64, n: usize, out: *mut f64) -> MopmStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let v = median(std::slice::from_raw_parts(values, n)).map_err(fail)?;
        write(out, v)
    })
}

/// Median-of-Means over `k` partition blocks.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_mom(
    sample: *const MopmSample,
    k: usize,
    seed: u64,
    out: *mut f64,
) -> MopmStatus {
    guard(|| {
        let s = deref(sample, "sample")?;
        write(out, mom(&s.0, k, Seed(seed)).map_err(fail)?.value)
    })
}

/// Median-of-Randomized-Means over `k` blocks of size `b`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_morm(
    sample: *const MopmSample,
    k: usize,
    b: usize,
    scheme: MopmScheme,
    seed: u64,
    out: *mut f64,
) -> MopmStatus {
    guard(|| {
        let s = deref(sample, "sample")?;
        let scheme = match scheme {
            MopmScheme::Swor => Resampling::Swor,
            MopmScheme::Mc => Resampling::Mc,
        };
        write(out, morm(&s.0, k, b, scheme, Seed(seed)).map_err(fail)?.value)
    })
}

/// Complete U-statistic of `kernel` on `sample`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_complete_ustat(
    sample: *const MopmSample,
    kernel: *const MopmKernel,
    out: *mut f64,
) -> MopmStatus {
    guard(|| {
        let (s, h) = (deref(sample, "sample")?, deref(kernel, "kernel")?);
        write(out, complete_ustat(&s.0, h).map_err(fail)?)
    })
}

/// Median of U-statistics over `k` partition blocks.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_mou(
    sample: *const MopmSample,
    kernel: *const MopmKernel,
    k: usize,
    seed: u64,
    out: *mut f64,
) -> MopmStatus {
    guard(|| {
        let (s, h) = (deref(sample, "sample")?, deref(kernel, "kernel")?);
        write(out, mou(&s.0, h, k, Seed(seed)).map_err(fail)?.value)
    })
}

/// Median of U-statistics over `k` SWoR blocks of size `b`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_moru(
    sample: *const MopmSample,
    kernel: *const MopmKernel,
    k: usize,
    b: usize,
    seed: u64,
    out: *mut f64,
) -> MopmStatus {
    guard(|| {
        let (s, h) = (deref(sample, "sample")?, deref(kernel, "kernel")?);
        write(out, moru(&s.0, h, k, b, Seed(seed)).map_err(fail)?.value)
    })
}

/// MoM with `k` blocks over the kernel values of the `n/2` split pairs.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_split_pairs(
    sample: *const MopmSample,
    kernel: *const MopmKernel,
    k: usize,
    seed: u64,
    out: *mut f64,
) -> MopmStatus {
    guard(|| {
        let (s, h) = (deref(sample, "sample")?, deref(kernel, "kernel")?);
        write(
            out,
            mom_on_split_pairs(&s.0, h, k, Seed(seed)).map_err(fail)?.value,
        )
    })
}

/// Median of `k` incomplete U-statistics over `m` sampled pairs each.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_moiu(
    sample: *const MopmSample,
    kernel: *const MopmKernel,
    k: usize,
    m: usize,
    scheme: MopmScheme,
    seed: u64,
    out: *mut f64,
) -> MopmStatus {
    guard(|| {
        let (s, h) = (deref(sample, "sample")?, deref(kernel, "kernel")?);
        let scheme = match scheme {
            MopmScheme::Swor => PairScheme::WithoutReplacement,
            MopmScheme::Mc => PairScheme::WithReplacement,
        };
        write(out, moiu(&s.0, h, k, m, scheme, Seed(seed)).map_err(fail)?.value)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_plan_mom(n: usize, delta: f64, sigma: f64, out: *mut MopmPlan) -> MopmStatus {
    guard(|| write(out, plan_of(bounds::plan_mom(n, delta, sigma).map_err(fail)?)))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_plan_morm(
    n: usize,
    delta: f64,
    tau: f64,
    sigma: f64,
    out: *mut MopmPlan,
) -> MopmStatus {
    guard(|| {
        write(
            out,
            plan_of(bounds::plan_morm(n, delta, tau, sigma).map_err(fail)?),
        )
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_plan_mou(
    n: usize,
    delta: f64,
    sigma1_sq: f64,
    sigma2_sq: f64,
    out: *mut MopmPlan,
) -> MopmStatus {
    guard(|| {
        write(
            out,
            plan_of(bounds::plan_mou(n, delta, sigma1_sq, sigma2_sq).map_err(fail)?),
        )
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_plan_moru(
    n: usize,
    delta: f64,
    tau: f64,
    sigma1_sq: f64,
    sigma2_sq: f64,
    out: *mut MopmPlan,
) -> MopmStatus {
    guard(|| {
        write(
            out,
            plan_of(bounds::plan_moru(n, delta, tau, sigma1_sq, sigma2_sq).map_err(fail)?),
        )
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_plan_split_pairs(
    n: usize,
    delta: f64,
    sigma_sq: f64,
    out: *mut MopmPlan,
) -> MopmStatus {
    guard(|| {
        write(
            out,
            plan_of(bounds::plan_split_pairs(n, delta, sigma_sq).map_err(fail)?),
        )
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mopm_plan_moiu(
    n: usize,
    delta: f64,
    tau: f64,
    m: usize,
    scheme: MopmScheme,
    out: *mut MopmPlan,
) -> MopmStatus {
    guard(|| {
        let scheme = match scheme {
            MopmScheme::Swor => PairScheme::WithoutReplacement,
            MopmScheme::Mc => PairScheme::WithReplacement,
        };
        write(
            out,
            plan_of(bounds::plan_moiu(n, delta, tau, m, scheme).map_err(fail)?),
        )
    })
}
