//! C ABI for locclab.
//!
//! Conventions:
//! - Every fallible function returns a [`LocclabStatus`]; results are written
//!   through out-pointers only on success.
//! - On failure, [`locclab_last_error_message`] returns a description of the
//!   most recent error on the calling thread.
//! - Handles are opaque and must be released with their `_free` function.
//!   Strings returned by the library must be released with
//!   [`locclab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use locclab::cli::{run_config, ExperimentConfig};
use locclab::distinguish::{helstrom, locc_lower_bound, ppt_upper_bound, thm2_locc_bound, StrategyLibrary};
use locclab::game::min_rounds;
use locclab::protocols::{auto_mode, concentration_success_prob};
use locclab::qmat::{density_from_json, DensityOperator};
use locclab::states::{make_hiding_pair, make_rho_pair, HidingPairSpec, PsiSpec};
use locclab::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocclabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Layout = 3,
    Numeric = 4,
    Spec = 5,
    Channel = 6,
    Config = 7,
    Solver = 8,
    Resource = 9,
    Mode = 10,
    CatalystViolation = 11,
    Domain = 12,
    Parse = 13,
    Invariant = 14,
    Io = 15,
    Panic = 16,
}

impl From<&Error> for LocclabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Layout(_) => Self::Layout,
            Error::Numeric(_) => Self::Numeric,
            Error::Spec(_) => Self::Spec,
            Error::Channel(_) => Self::Channel,
            Error::Config(_) => Self::Config,
            Error::Solver { .. } => Self::Solver,
            Error::Resource(_) => Self::Resource,
            Error::Mode(_) => Self::Mode,
            Error::CatalystViolation { .. } => Self::CatalystViolation,
            Error::Domain(_) => Self::Domain,
            Error::Parse { .. } => Self::Parse,
            Error::Invariant(_) => Self::Invariant,
            Error::Io(_) => Self::Io,
        }
    }
}

/// Opaque pair of density operators (ρ₀, ρ₁) on a common layout.
pub struct LocclabStatePair {
    rho0: DensityOperator,
    rho1: DensityOperator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), (LocclabStatus, String)>) -> LocclabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LocclabStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LocclabStatus::Panic
        }
    }
}

fn lab<T>(r: locclab::Result<T>) -> Result<T, (LocclabStatus, String)> {
    r.map_err(|e| (LocclabStatus::from(&e), e.to_string()))
}

fn null() -> (LocclabStatus, String) {
    (LocclabStatus::NullPointer, "null pointer argument".into())
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, (LocclabStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (LocclabStatus::InvalidUtf8, e.to_string()))
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), (LocclabStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

unsafe fn pair_ref<'a>(p: *const LocclabStatePair) -> Result<&'a LocclabStatePair, (LocclabStatus, String)> {
    p.as_ref().ok_or_else(null)
}

fn into_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn locclab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or NULL if none. Free with
/// `locclab_string_free`.
#[no_mangle]
pub extern "C" fn locclab_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().clone().map(into_string).unwrap_or(ptr::null_mut()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn locclab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Werner-projector hiding pair σ₀, σ₁ of local dimension `d`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn locclab_werner_pair(d: usize, out: *mut *mut LocclabStatePair) -> LocclabStatus {
    guard(|| {
        let (rho0, rho1) = lab(make_hiding_pair(&HidingPairSpec::werner(d)))?;
        write(out, Box::into_raw(Box::new(LocclabStatePair { rho0, rho1 })))
    })
}

/// ρᵢ = σᵢ ⊗ ψ(λ, d₂).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn locclab_rho_pair(
    d: usize,
    lambda: f64,
    d2: usize,
    out: *mut *mut LocclabStatePair,
) -> LocclabStatus {
    guard(|| {
        let psi = lab(PsiSpec::new(lambda, d2))?;
        let (rho0, rho1) = lab(make_rho_pair(&HidingPairSpec::werner(d), &psi))?;
        write(out, Box::into_raw(Box::new(LocclabStatePair { rho0, rho1 })))
    })
}

/// Pair parsed from two operator JSON documents.
///
/// # Safety
/// `rho0_json`, `rho1_json` must be NUL-terminated strings; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn locclab_pair_from_json(
    rho0_json: *const c_char,
    rho1_json: *const c_char,
    out: *mut *mut LocclabStatePair,
) -> LocclabStatus {
    guard(|| {
        let rho0 = lab(density_from_json(read_str(rho0_json)?))?;
        let rho1 = lab(density_from_json(read_str(rho1_json)?))?;
        if rho0.layout() != rho1.layout() {
            return Err((LocclabStatus::Layout, "the two states have different layouts".into()));
        }
        write(out, Box::into_raw(Box::new(LocclabStatePair { rho0, rho1 })))
    })
}

/// Total Hilbert-space dimension of the pair.
///
/// # Safety
/// `pair` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn locclab_pair_dim(pair: *const LocclabStatePair, out: *mut usize) -> LocclabStatus {
    guard(|| write(out, pair_ref(pair)?.rho0.dim()))
}

/// Releases a pair. NULL is ignored.
///
/// # Safety
/// `pair` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn locclab_pair_free(pair: *mut LocclabStatePair) {
    if !pair.is_null() {
        drop(Box::from_raw(pair));
    }
}

/// Optimal global success probability.
///
/// # Safety
/// `pair` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn locclab_helstrom(pair: *const LocclabStatePair, out: *mut f64) -> LocclabStatus {
    guard(|| {
        let p = pair_ref(pair)?;
        write(out, lab(helstrom(&p.rho0, &p.rho1))?)
    })
}

/// Certified PPT upper bound on the LOCC success probability.
///
/// # Safety
/// `pair` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn locclab_ppt_upper(pair: *const LocclabStatePair, out: *mut f64) -> LocclabStatus {
    guard(|| {
        let p = pair_ref(pair)?;
        write(out, lab(ppt_upper_bound(&p.rho0, &p.rho1))?.value)
    })
}

/// Best one-way LOCC success probability over the default strategy library.
///
/// # Safety
/// `pair` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn locclab_locc_lower(pair: *const LocclabStatePair, out: *mut f64) -> LocclabStatus {
    guard(|| {
        let p = pair_ref(pair)?;
        write(out, lab(locc_lower_bound(&p.rho0, &p.rho1, &StrategyLibrary::default()))?.value)
    })
}

/// ε + (1 + ε′)/2.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn locclab_thm2_bound(eps: f64, eps_prime: f64, out: *mut f64) -> LocclabStatus {
    guard(|| write(out, lab(thm2_locc_bound(eps, eps_prime))?))
}

/// Smallest number of detection rounds for threshold `delta` and trace
/// distance `trace_distance`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn locclab_min_rounds(delta: f64, trace_distance: f64, out: *mut u64) -> LocclabStatus {
    guard(|| write(out, lab(min_rounds(delta, trace_distance))?))
}

/// Pr[log₂ dim ≥ target] for the type measurement on n copies of ψ(λ, d₂).
/// Exact when feasible, otherwise estimated from `samples` draws.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn locclab_concentration_success(
    lambda: f64,
    d2: usize,
    n: usize,
    target: f64,
    samples: usize,
    seed: u64,
    out: *mut f64,
) -> LocclabStatus {
    guard(|| {
        let spectrum = lab(lab(PsiSpec::new(lambda, d2))?.spectrum())?;
        let mode = auto_mode(&spectrum, n, samples, seed);
        write(out, lab(concentration_success_prob(&spectrum, n, target, mode))?.probability)
    })
}

/// Runs an experiment config (JSON text) and returns its summary as JSON.
/// Artifacts are written when the config names an output directory.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `summary_out` valid. The
/// returned string must be freed with `locclab_string_free`.
#[no_mangle]
pub unsafe extern "C" fn locclab_run_config(
    config_json: *const c_char,
    threads: usize,
    summary_out: *mut *mut c_char,
) -> LocclabStatus {
    guard(|| {
        let cfg = lab(ExperimentConfig::from_json(read_str(config_json)?))?;
        let out = lab(run_config(&cfg, threads))?;
        write(summary_out, into_string(out.summary.to_string()))
    })
}
