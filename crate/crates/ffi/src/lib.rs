//! C interface to `qbdissim`.
//!
//! Every function returns a [`QbStatus`]; results go through out-pointers.
//! Handles are opaque and must be released with their `_free` function.
//! After a failure, [`qb_last_error`] describes it on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qbdissim::collective::{advantage, BatteryEnsembleSpec};
use qbdissim::control::{charge_with, optimize_protocol, Dephasing, DriveParams, Protocol};
use qbdissim::engine::{run_cycle, CycleSpec, Variant};
use qbdissim::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    UnsupportedRegime = 3,
    Numerical = 4,
    OutOfRange = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QbStatus {
    match e {
        Error::InvalidParameter(_) | Error::Config(_) | Error::DimensionMismatch(_) | Error::InvalidState(_) => {
            QbStatus::InvalidParameter
        }
        Error::UnsupportedRegime(_) => QbStatus::UnsupportedRegime,
        _ => QbStatus::Numerical,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (QbStatus, String)>>(f: F) -> QbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QbStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QbStatus::Panic
        }
    }
}

fn lib<T>(r: qbdissim::Result<T>) -> Result<T, (QbStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (QbStatus, String) {
    (QbStatus::NullPointer, format!("{what} is null"))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Coupling and bath of a single driven battery.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QbDriveParams {
    pub omega: f64,
    pub epsilon: f64,
    pub beta: f64,
}

/// Power and efficiencies at the charge time.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QbChargeMetrics {
    pub t_charge: f64,
    pub stored_energy: f64,
    pub power: f64,
    pub work: f64,
    pub heat: f64,
    pub ergotropy: f64,
    pub eta_heat: f64,
    pub eta_ergo: f64,
}

/// Thermodynamics of one limit cycle. Works are positive when extracted.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QbCycleLedger {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
    pub q_h: f64,
    pub q_c: f64,
    pub w_net: f64,
    pub eta: f64,
    pub power: f64,
    pub coherence_max: f64,
    pub converged: bool,
}

/// Opaque engine parameters.
pub struct QbCycleSpec(CycleSpec);

/// Opaque piecewise-constant drive protocol.
pub struct QbProtocol(Protocol);

/// Collective advantage `T_parallel / T_collective` for `n` batteries.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn qb_collective_advantage(
    n: usize,
    omega: f64,
    epsilon: f64,
    beta: f64,
    delta: f64,
    out: *mut f64,
) -> QbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = lib(BatteryEnsembleSpec::new(n, omega, epsilon, beta, delta))?;
        let g = lib(advantage(&spec))?;
        *out = g;
        Ok(())
    })
}

/// Charges with `alpha = 1` for `t_d`, then undriven, with dephasing strength `p`.
///
/// # Safety
/// `params` must be null or valid for reads; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qb_charge_double_quench(
    params: *const QbDriveParams,
    t_d: f64,
    p: f64,
    delta: f64,
    out: *mut QbChargeMetrics,
) -> QbStatus {
    guard(|| {
        let (Some(params), false) = (params.as_ref(), out.is_null()) else {
            return Err(null("params or out"));
        };
        let dp = lib(DriveParams::new(params.omega, params.epsilon, params.beta))?;
        let protocol = lib(Protocol::double_quench(t_d, t_d))?;
        let (_, m) = lib(charge_with(&protocol, &dp, Dephasing::new(p), delta))?;
        *out = QbChargeMetrics {
            t_charge: m.t_charge,
            stored_energy: m.stored_energy,
            power: m.power,
            work: m.work,
            heat: m.heat,
            ergotropy: m.ergotropy,
            eta_heat: m.eta_heat,
            eta_ergo: m.eta_ergo,
        };
        Ok(())
    })
}

/// Gradient-ascent protocol (best of the default restarts).
///
/// # Safety
/// `params` must be null or valid for reads; `out` null or valid for writes.
/// The handle written to `out` must be released with [`qb_protocol_free`].
#[no_mangle]
pub unsafe extern "C" fn qb_optimize_protocol(
    params: *const QbDriveParams,
    t_n: f64,
    n_segments: usize,
    zeta: f64,
    seed: u64,
    out: *mut *mut QbProtocol,
) -> QbStatus {
    guard(|| {
        let (Some(params), false) = (params.as_ref(), out.is_null()) else {
            return Err(null("params or out"));
        };
        let dp = lib(DriveParams::new(params.omega, params.epsilon, params.beta))?;
        let report = lib(optimize_protocol(t_n, n_segments, &dp, zeta, seed))?;
        *out = Box::into_raw(Box::new(QbProtocol(report.best.protocol)));
        Ok(())
    })
}

/// Double-quench protocol: `alpha = 1` on `[0, t_d)`, then `alpha = 0` until `total`.
///
/// # Safety
/// `out` must be null or valid for writes; release the handle with [`qb_protocol_free`].
#[no_mangle]
pub unsafe extern "C" fn qb_protocol_double_quench(t_d: f64, total: f64, out: *mut *mut QbProtocol) -> QbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = lib(Protocol::double_quench(t_d, total))?;
        *out = Box::into_raw(Box::new(QbProtocol(p)));
        Ok(())
    })
}

/// Number of segments, or 0 for a null handle.
///
/// # Safety
/// `protocol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_protocol_len(protocol: *const QbProtocol) -> usize {
    protocol.as_ref().map_or(0, |p| p.0.segments.len())
}

/// Duration and `alpha` of segment `k`.
///
/// # Safety
/// `protocol` must be null or a live handle; `dt` and `alpha` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qb_protocol_segment(
    protocol: *const QbProtocol,
    k: usize,
    dt: *mut f64,
    alpha: *mut f64,
) -> QbStatus {
    guard(|| {
        let (Some(p), false, false) = (protocol.as_ref(), dt.is_null(), alpha.is_null()) else {
            return Err(null("protocol, dt or alpha"));
        };
        let s = p.0.segments.get(k).ok_or((QbStatus::OutOfRange, format!("segment {k} of {}", p.0.segments.len())))?;
        *dt = s.dt;
        *alpha = s.alpha;
        Ok(())
    })
}

/// # Safety
/// `protocol` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qb_protocol_free(protocol: *mut QbProtocol) {
    if !protocol.is_null() {
        drop(Box::from_raw(protocol));
    }
}

/// Engine parameters with the coherent variant, full dephasing for the
/// dephased variant and an even split of the cycle time.
///
/// # Safety
/// `out` must be null or valid for writes; release the handle with [`qb_cycle_spec_free`].
#[no_mangle]
pub unsafe extern "C" fn qb_cycle_spec_new(
    omega_c: f64,
    omega_h: f64,
    beta_c: f64,
    beta_h: f64,
    epsilon: f64,
    t_d: f64,
    t_cycle: f64,
    out: *mut *mut QbCycleSpec,
) -> QbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = lib(CycleSpec::new(omega_c, omega_h, beta_c, beta_h, epsilon, t_d, t_cycle))?;
        *out = Box::into_raw(Box::new(QbCycleSpec(s)));
        Ok(())
    })
}

/// Selects the coherent (`true`) or dephased (`false`) variant.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_cycle_spec_set_coherent(spec: *mut QbCycleSpec, coherent: bool) -> QbStatus {
    guard(|| {
        let s = spec.as_mut().ok_or_else(|| null("spec"))?;
        s.0 = s.0.with_variant(if coherent { Variant::Coherent } else { Variant::Dephased });
        Ok(())
    })
}

/// # Safety
/// `spec` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qb_cycle_spec_free(spec: *mut QbCycleSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Runs the engine to its limit cycle.
///
/// # Safety
/// `spec` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qb_run_cycle(spec: *const QbCycleSpec, out: *mut QbCycleLedger) -> QbStatus {
    guard(|| {
        let (Some(s), false) = (spec.as_ref(), out.is_null()) else {
            return Err(null("spec or out"));
        };
        let l = lib(run_cycle(&s.0))?.ledger;
        *out = QbCycleLedger {
            w1: l.w1,
            w2: l.w2,
            w3: l.w3,
            w4: l.w4,
            w5: l.w5,
            q_h: l.q_h,
            q_c: l.q_c,
            w_net: l.w_net,
            eta: l.eta,
            power: l.power,
            coherence_max: l.coherence_max,
            converged: l.converged,
        };
        Ok(())
    })
}
