//! C ABI over `gcfx`.
//!
//! Every call returns a [`GcfxStatus`]; on failure the message is available
//! from [`gcfx_last_error`] on the same thread. Strings handed out by this
//! library are owned by the caller and released with [`gcfx_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gcfx::bounds::{bounded_bound, lemma_bound, nu_estimate, GrowthSpec};
use gcfx::catalog::{family_bound, family_stream, FamilySpec, FamilyStream};
use gcfx::cfcore::{self, CoefficientStream};
use gcfx::constructions::{approximation_audit, prescribed_stream, Exponent, PrescribedPlan};
use gcfx::numeric::parse_positive_rational;
use gcfx::CfError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcfxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConditionViolated = 3,
    NonConvergence = 4,
    ResourceExhausted = 5,
    Panic = 6,
}

/// Opaque coefficient stream.
pub struct GcfxStream {
    inner: StreamKind,
}

enum StreamKind {
    Plain(CoefficientStream),
    Family(Box<FamilyStream>),
}

impl GcfxStream {
    fn coefficients(&self) -> &CoefficientStream {
        match &self.inner {
            StreamKind::Plain(s) => s,
            StreamKind::Family(f) => &f.stream,
        }
    }
}

/// Opaque truncated construction with prescribed exponent.
pub struct GcfxPlan {
    plan: PrescribedPlan,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &CfError) -> GcfxStatus {
    match err {
        CfError::ConditionViolated(_) => GcfxStatus::ConditionViolated,
        CfError::NonConvergence { .. } | CfError::TieUnresolved { .. } | CfError::NeedsMorePrecision { .. } => {
            GcfxStatus::NonConvergence
        }
        CfError::ResourceExhausted { .. } => GcfxStatus::ResourceExhausted,
        _ => GcfxStatus::InvalidArgument,
    }
}

enum Failure {
    Null(&'static str),
    Lib(CfError),
}

impl From<CfError> for Failure {
    fn from(e: CfError) -> Self {
        Failure::Lib(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> GcfxStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GcfxStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            GcfxStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            GcfxStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(CfError::Parse(format!("{what} is not UTF-8"))))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

fn json<T: serde::Serialize>(value: &T) -> Result<*mut c_char, Failure> {
    serde_json::to_string(value)
        .map(c_string)
        .map_err(|e| Failure::Lib(CfError::InvalidValue(e.to_string())))
}

unsafe fn stream_ref<'a>(s: *const GcfxStream) -> Result<&'a GcfxStream, Failure> {
    s.as_ref().ok_or(Failure::Null("stream"))
}

unsafe fn plan_ref<'a>(p: *const GcfxPlan) -> Result<&'a GcfxPlan, Failure> {
    p.as_ref().ok_or(Failure::Null("plan"))
}

/// `name=value` pairs separated by spaces or semicolons.
unsafe fn family_spec(name: *const c_char, params: *const c_char) -> Result<FamilySpec, Failure> {
    let name = text(name, "family name")?;
    let params = if params.is_null() { "" } else { text(params, "params")? };
    let pairs = params.split([' ', ';']).filter(|p| !p.is_empty());
    Ok(FamilySpec::parse(name, pairs)?)
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn gcfx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn gcfx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` is null or was returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gcfx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Stream `b0 + K a_n / b_n` whose coefficients repeat with periods
/// `a_len` and `b_len`.
///
/// # Safety
/// `a` and `b` point to `a_len` and `b_len` readable values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gcfx_stream_periodic(
    b0: u64,
    a: *const u64,
    a_len: usize,
    b: *const u64,
    b_len: usize,
    out: *mut *mut GcfxStream,
) -> GcfxStatus {
    guard(|| {
        if a.is_null() || b.is_null() {
            return Err(Failure::Null("coefficients"));
        }
        let to_big = |p: *const u64, n: usize| std::slice::from_raw_parts(p, n).iter().map(|&v| v.into()).collect();
        let stream = CoefficientStream::periodic(b0.into(), to_big(a, a_len), to_big(b, b_len))?;
        let handle = Box::new(GcfxStream {
            inner: StreamKind::Plain(stream),
        });
        write_out(out, Box::into_raw(handle), "out")
    })
}

/// Stream of a registered family; `params` may be null.
///
/// # Safety
/// `name` and `params` are null or NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gcfx_stream_family(
    name: *const c_char,
    params: *const c_char,
    out: *mut *mut GcfxStream,
) -> GcfxStatus {
    guard(|| {
        let fs = family_stream(&family_spec(name, params)?)?;
        let handle = Box::new(GcfxStream {
            inner: StreamKind::Family(Box::new(fs)),
        });
        write_out(out, Box::into_raw(handle), "out")
    })
}

/// # Safety
/// `s` is null or a live stream handle.
#[no_mangle]
pub unsafe extern "C" fn gcfx_stream_free(s: *mut GcfxStream) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Enclosure of the value to width `precision` (decimal text), as JSON.
/// Family streams are evaluated through their outer map.
///
/// # Safety
/// `s` is a live handle, `precision` NUL-terminated, `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn gcfx_stream_evaluate_json(
    s: *const GcfxStream,
    precision: *const c_char,
    max_terms: usize,
    out_json: *mut *mut c_char,
) -> GcfxStatus {
    guard(|| {
        let s = stream_ref(s)?;
        let width = parse_positive_rational(text(precision, "precision")?)?;
        let e = match &s.inner {
            StreamKind::Plain(c) => cfcore::evaluate(c, &width, max_terms)?,
            StreamKind::Family(f) => f.evaluate(&width, max_terms)?,
        };
        write_out(out_json, json(&e)?, "out_json")
    })
}

/// Unreduced convergent `A_n / B_n` of the coefficient stream, as decimal
/// strings.
///
/// # Safety
/// `s` is a live handle; `out_num` and `out_den` are writable.
#[no_mangle]
pub unsafe extern "C" fn gcfx_stream_convergent(
    s: *const GcfxStream,
    n: usize,
    out_num: *mut *mut c_char,
    out_den: *mut *mut c_char,
) -> GcfxStatus {
    guard(|| {
        let c = cfcore::convergent(stream_ref(s)?.coefficients(), n)?;
        if out_num.is_null() || out_den.is_null() {
            return Err(Failure::Null("out"));
        }
        write_out(out_num, c_string(c.num.to_string()), "out_num")?;
        write_out(out_den, c_string(c.den.to_string()), "out_den")
    })
}

/// Empirical `max log Π_n / log B_n` over the trailing window up to `n_max`.
///
/// # Safety
/// `s` is a live handle; `out_nu` is writable.
#[no_mangle]
pub unsafe extern "C" fn gcfx_stream_nu_estimate(
    s: *const GcfxStream,
    n_max: usize,
    exact_until: usize,
    out_nu: *mut f64,
) -> GcfxStatus {
    guard(|| {
        let trace = nu_estimate(stream_ref(s)?.coefficients(), n_max, exact_until)?;
        write_out(out_nu, trace.empirical_nu, "out_nu")
    })
}

/// `2 + ν/(1 − ν)` for `0 ≤ ν < 1`.
///
/// # Safety
/// `out_mu` is writable.
#[no_mangle]
pub unsafe extern "C" fn gcfx_lemma_bound(nu: f64, out_mu: *mut f64) -> GcfxStatus {
    guard(|| write_out(out_mu, lemma_bound(nu)?, "out_mu"))
}

/// Bound for coefficients with `α₁ ≤ a_n ≤ α₂`, `β₁ ≤ b_n ≤ β₂`.
/// Returns `ConditionViolated` when the growth condition fails.
///
/// # Safety
/// `out_mu` is writable.
#[no_mangle]
pub unsafe extern "C" fn gcfx_bounded_bound(
    alpha1: u64,
    alpha2: u64,
    beta1: u64,
    beta2: u64,
    out_mu: *mut f64,
) -> GcfxStatus {
    guard(|| {
        let report = bounded_bound(&GrowthSpec::bounded(alpha1, alpha2, beta1, beta2))?.into_result()?;
        write_out(out_mu, report.mu_upper.unwrap_or(f64::NAN), "out_mu")
    })
}

/// Primary bound report of a family, as JSON. The report is written even
/// when a condition fails, in which case the status is `ConditionViolated`.
///
/// # Safety
/// `name` NUL-terminated, `params` null or NUL-terminated, `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn gcfx_family_bound_json(
    name: *const c_char,
    params: *const c_char,
    out_json: *mut *mut c_char,
) -> GcfxStatus {
    guard(|| {
        let report = family_bound(&family_spec(name, params)?)?;
        let ok = report.condition_ok();
        write_out(out_json, json(&report)?, "out_json")?;
        if ok {
            Ok(())
        } else {
            Err(Failure::Lib(CfError::ConditionViolated(format!(
                "{} route does not apply",
                report.theorem
            ))))
        }
    })
}

/// Construction with exponent `s` (rational text or `inf`) over `blocks`
/// blocks.
///
/// # Safety
/// `exponent` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gcfx_plan_new(exponent: *const c_char, blocks: usize, out: *mut *mut GcfxPlan) -> GcfxStatus {
    guard(|| {
        let s: Exponent = text(exponent, "exponent")?.parse()?;
        let plan = prescribed_stream(&s, blocks)?;
        write_out(out, Box::into_raw(Box::new(GcfxPlan { plan })), "out")
    })
}

/// # Safety
/// `p` is a live plan; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn gcfx_plan_json(p: *const GcfxPlan, out_json: *mut *mut c_char) -> GcfxStatus {
    guard(|| {
        let p = plan_ref(p)?;
        write_out(out_json, json(&p.plan)?, "out_json")
    })
}

/// Audit of the simple convergent at `n ≡ 1 (mod 4)`, as JSON.
///
/// # Safety
/// `p` is a live plan; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn gcfx_plan_audit_json(p: *const GcfxPlan, n: usize, out_json: *mut *mut c_char) -> GcfxStatus {
    guard(|| {
        let record = approximation_audit(&plan_ref(p)?.plan, n)?;
        write_out(out_json, json(&record)?, "out_json")
    })
}

/// # Safety
/// `p` is null or a live plan.
#[no_mangle]
pub unsafe extern "C" fn gcfx_plan_free(p: *mut GcfxPlan) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}
