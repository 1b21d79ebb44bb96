//! C ABI over `bosonic_fridge`.
//!
//! Handles are opaque pointers created by `bf_*_new`/`bf_*_run` functions and
//! released with the matching `bf_*_free`. Every fallible call returns a
//! [`BfStatus`]; on failure the message is kept per thread and can be copied
//! out with [`bf_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bosonic_fridge::dynamics::EvolveOptions;
use bosonic_fridge::error::Error;
use bosonic_fridge::model::SystemParams;
use bosonic_fridge::presets;
use bosonic_fridge::protocols::{
    run_schedule, steady_report, transient_protocol, Coupling, Record, Schedule, TransientOptions,
};

#[repr(C)]
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum BfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Validation = 4,
    Numerical = 5,
    MemoryBudget = 6,
    NoOscillation = 7,
    OutOfRange = 8,
    Panic = 9,
}

pub struct BfParams {
    inner: SystemParams,
}

pub struct BfTrajectory {
    records: Vec<Record>,
}

#[repr(C)]
#[derive(Debug, Copy, Clone, Default)]
pub struct BfSteadyReport {
    pub theta_c_mk: f64,
    pub theta_c_entropy_mk: f64,
    pub ratio: f64,
    pub mean_n: [f64; 3],
    /// Heat currents in attowatt, order c, h, r.
    pub j_attowatt: [f64; 3],
    /// NaN when the hot current vanishes.
    pub cop_current: f64,
    pub cop_freq: f64,
    pub cooling_margin: f64,
    pub thermality_tvd: f64,
    pub residual: f64,
}

#[repr(C)]
#[derive(Debug, Copy, Clone, Default)]
pub struct BfRecord {
    pub t_ns: f64,
    pub phi_rad: f64,
    pub n: [f64; 3],
    pub theta_c_mk: f64,
    pub theta_c_entropy_mk: f64,
    pub j_attowatt: [f64; 3],
}

#[repr(C)]
#[derive(Debug, Copy, Clone, Default)]
pub struct BfTransientEvent {
    pub t_min_ns: f64,
    pub theta_min_mk: f64,
    pub steady_theta_mk: f64,
    pub below_ns: f64,
    pub qualifying: bool,
    pub below_at_end: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> BfStatus {
    match err {
        Error::Segment { source, .. } => status_of(source),
        Error::InvalidArgument(_) | Error::InvalidDimension(_) | Error::UnknownMode(_) => BfStatus::InvalidArgument,
        Error::MemoryBudget(_) => BfStatus::MemoryBudget,
        Error::NoOscillation { .. } => BfStatus::NoOscillation,
        e if e.is_validation() => BfStatus::Validation,
        _ => BfStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), BfStatus>) -> BfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            BfStatus::Panic
        }
    }
}

fn fail(err: Error) -> BfStatus {
    let s = status_of(&err);
    set_error(err.to_string());
    s
}

fn null(what: &str) -> BfStatus {
    set_error(format!("null pointer: {what}"));
    BfStatus::NullPointer
}

unsafe fn params_ref<'a>(p: *const BfParams) -> Result<&'a SystemParams, BfStatus> {
    p.as_ref().map(|p| &p.inner).ok_or_else(|| null("params"))
}

unsafe fn params_mut<'a>(p: *mut BfParams) -> Result<&'a mut SystemParams, BfStatus> {
    p.as_mut().map(|p| &mut p.inner).ok_or_else(|| null("params"))
}

fn nan_if_none(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn bf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates parameters from a bundled preset name such as `"table1"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_params_from_preset(name: *const c_char, out: *mut *mut BfParams) -> BfStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|_| {
            set_error("preset name is not UTF-8".into());
            BfStatus::InvalidUtf8
        })?;
        let preset = presets::by_name(name).map_err(fail)?;
        *out = Box::into_raw(Box::new(BfParams { inner: preset.params }));
        Ok(())
    })
}

/// Releases parameters; null is ignored.
///
/// # Safety
/// `p` must come from `bf_params_from_preset` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bf_params_free(p: *mut BfParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bf_params_set_ej_ghz(p: *mut BfParams, ej_ghz: f64) -> BfStatus {
    guard(|| {
        params_mut(p)?.ej_ghz = ej_ghz;
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bf_params_set_phi(p: *mut BfParams, phi_rad: f64) -> BfStatus {
    guard(|| {
        params_mut(p)?.phi_rad = phi_rad;
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bf_params_set_t_hot_mk(p: *mut BfParams, t_mk: f64) -> BfStatus {
    guard(|| {
        params_mut(p)?.h.temperature_mk = t_mk;
        Ok(())
    })
}

/// Fock truncation per mode, order c, h, r.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bf_params_set_dims(p: *mut BfParams, d_c: usize, d_h: usize, d_r: usize) -> BfStatus {
    guard(|| {
        params_mut(p)?.dims = [d_c, d_h, d_r];
        Ok(())
    })
}

/// Checks the parameters without solving anything.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bf_params_validate(p: *const BfParams) -> BfStatus {
    guard(|| params_ref(p)?.validate().map_err(fail))
}

/// Steady state and its thermodynamic summary.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_steady_report(p: *const BfParams, out: *mut BfSteadyReport) -> BfStatus {
    guard(|| {
        let params = params_ref(p)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let (r, residual) = steady_report(params, None).map_err(fail)?;
        *out = BfSteadyReport {
            theta_c_mk: r.theta_c_mk,
            theta_c_entropy_mk: nan_if_none(r.theta_c_entropy_mk),
            ratio: r.ratio,
            mean_n: r.mean_n,
            j_attowatt: r.currents.attowatt,
            cop_current: nan_if_none(r.cop_current),
            cop_freq: r.cop_freq,
            cooling_margin: r.cooling_margin,
            thermality_tvd: r.thermality_tvd,
            residual,
        };
        Ok(())
    })
}

/// Evolves `cycles` on/off windows from the bath-thermal state, sampling
/// every `sample_ns`.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_run_on_off(
    p: *const BfParams,
    on_ns: f64,
    off_ns: f64,
    cycles: usize,
    sample_ns: f64,
    out: *mut *mut BfTrajectory,
) -> BfStatus {
    guard(|| {
        let params = params_ref(p)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let schedule = Schedule::on_off(on_ns, off_ns, cycles, sample_ns);
        let run = run_schedule(&schedule, params, Coupling::Dressed, EvolveOptions::default()).map_err(fail)?;
        *out = Box::into_raw(Box::new(BfTrajectory { records: run.records }));
        Ok(())
    })
}

/// Number of samples; 0 for null.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bf_trajectory_len(t: *const BfTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.records.len())
}

/// # Safety
/// `t` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_trajectory_get(t: *const BfTrajectory, index: usize, out: *mut BfRecord) -> BfStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("trajectory"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = t.records.get(index).ok_or_else(|| {
            set_error(format!("index {index} out of range for {} samples", t.records.len()));
            BfStatus::OutOfRange
        })?;
        *out = BfRecord {
            t_ns: r.t_ns,
            phi_rad: r.phi_rad,
            n: r.n,
            theta_c_mk: r.theta_c_mk,
            theta_c_entropy_mk: nan_if_none(r.theta_c_entropy_mk),
            j_attowatt: r.j_attowatt,
        };
        Ok(())
    })
}

/// # Safety
/// `t` must come from `bf_run_on_off` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bf_trajectory_free(t: *mut BfTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Runs the switch-off-at-first-minimum protocol with default options.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_transient(p: *const BfParams, out: *mut BfTransientEvent) -> BfStatus {
    guard(|| {
        let params = params_ref(p)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let opts = TransientOptions::for_params(params);
        let ev = transient_protocol(params, &opts).map_err(fail)?.event;
        *out = BfTransientEvent {
            t_min_ns: ev.t_min_ns,
            theta_min_mk: ev.theta_min_mk,
            steady_theta_mk: ev.steady_theta_mk,
            below_ns: ev.below_ns,
            qualifying: ev.qualifying,
            below_at_end: ev.below_at_end,
        };
        Ok(())
    })
}
