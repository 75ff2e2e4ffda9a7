//! C ABI over `chemotaxis-waves`.
//!
//! Conventions:
//! * every fallible function returns a [`CwStatus`] code (`CW_STATUS_OK` = 0)
//!   and writes results through out-pointers;
//! * objects are opaque handles created by `*_new`/`*_solve` and released by
//!   the matching `*_free` (passing `NULL` to a `*_free` is a no-op);
//! * the message of the most recent failure on the calling thread is
//!   available through [`cw_last_error_message`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use chemotaxis_waves::params::{self, ModelParams};
use chemotaxis_waves::wave::{self, WaveOptions, WaveProfile};
use chemotaxis_waves::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    WindowUndefined = 3,
    NoRoot = 4,
    Inadmissible = 5,
    NotApplicable = 6,
    Grid = 7,
    Singular = 8,
    BudgetExceeded = 9,
    NoConvergence = 10,
    Divergence = 11,
    NoConstruction = 12,
    Fit = 13,
    BufferTooSmall = 14,
    Panic = 15,
}

impl From<&Error> for CwStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => CwStatus::Domain,
            Error::WindowUndefined { .. } => CwStatus::WindowUndefined,
            Error::NoRoot { .. } => CwStatus::NoRoot,
            Error::Inadmissible(_) => CwStatus::Inadmissible,
            Error::NotApplicable(_) => CwStatus::NotApplicable,
            Error::Grid(_) => CwStatus::Grid,
            Error::Singular(_) => CwStatus::Singular,
            Error::BudgetExceeded { .. } => CwStatus::BudgetExceeded,
            Error::NoConvergence { .. } => CwStatus::NoConvergence,
            Error::Divergence { .. } => CwStatus::Divergence,
            Error::NoConstruction(_) => CwStatus::NoConstruction,
            Error::Fit(_) => CwStatus::Fit,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

/// Run `f`, translating library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (CwStatus, String)>) -> CwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            CwStatus::Ok
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
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            CwStatus::Panic
        }
    }
}

fn lib<T>(r: chemotaxis_waves::Result<T>) -> Result<T, (CwStatus, String)> {
    r.map_err(|e| (CwStatus::from(&e), e.to_string()))
}

fn null(what: &str) -> (CwStatus, String) {
    (CwStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CwStatus, String)> {
    // SAFETY: the caller guarantees `p` is NULL or a live handle from this library.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), (CwStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null, and the caller guarantees it is valid for writes.
    unsafe { p.write(value) };
    Ok(())
}

/// Copy the last error message of this thread into `buf` (NUL-terminated).
///
/// Returns the message length in bytes excluding the terminator; when it is
/// `>= len` the message was truncated. `buf` may be NULL when `len` is 0.
///
/// # Safety
/// `buf` must be valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn cw_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: `buf` holds at least `len > n` bytes.
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Opaque model parameters.
pub struct CwParams(ModelParams);

/// Create a parameter handle. Requires finite `a, b > 0` and `chi, tau >= 0`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cw_params_new(a: f64, b: f64, chi: f64, tau: f64, out: *mut *mut CwParams) -> CwStatus {
    guard(|| {
        let p = lib(ModelParams::new(a, b, chi, tau))?;
        // SAFETY: forwarded caller contract.
        unsafe { write(out, Box::into_raw(Box::new(CwParams(p))), "out") }
    })
}

/// Release a parameter handle.
///
/// # Safety
/// `params` must be NULL or a handle from [`cw_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cw_params_free(params: *mut CwParams) {
    if !params.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Infimum `m_tau` of the chemotaxis constraint; depends on `a` and `tau` only.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cw_m_tau(a: f64, tau: f64, out: *mut f64) -> CwStatus {
    guard(|| {
        let m = lib(params::m_tau(a, tau))?;
        // SAFETY: forwarded caller contract.
        unsafe { write(out, m, "out") }
    })
}

/// Admissible speed window for given parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CwSpeedWindow {
    pub mu_tau: f64,
    pub m_tau: f64,
    pub chi_star: f64,
    pub mu_star2: f64,
    pub mu_star: f64,
    pub c_star: f64,
    /// `+inf` when the window is unbounded above.
    pub c_star2: f64,
    pub unbounded: bool,
}

/// Compute the admissible window; fails with `CW_STATUS_WINDOW_UNDEFINED` when
/// chemotaxis is absent or too strong.
///
/// # Safety
/// `params` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cw_admissible_window(params: *const CwParams, out: *mut CwSpeedWindow) -> CwStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let p = unsafe { deref(params, "params") }?;
        let w = lib(params::admissible_window(&p.0))?;
        let value = CwSpeedWindow {
            mu_tau: w.mu_tau,
            m_tau: w.m_tau,
            chi_star: w.chi_star,
            mu_star2: w.mu_star2,
            mu_star: w.mu_star,
            c_star: w.c_star,
            c_star2: w.c_star2,
            unbounded: w.unbounded,
        };
        // SAFETY: forwarded caller contract.
        unsafe { write(out, value, "out") }
    })
}

/// Decay rate `mu` of a wave with speed `c` (the smaller root of `mu^2 - c mu + a = 0`).
///
/// # Safety
/// `params` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cw_mu_from_speed(params: *const CwParams, c: f64, out: *mut f64) -> CwStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let p = unsafe { deref(params, "params") }?;
        let mu = lib(params::mu_from_speed(c, &p.0))?;
        // SAFETY: forwarded caller contract.
        unsafe { write(out, mu, "out") }
    })
}

/// Opaque traveling-wave profile.
pub struct CwWave(WaveProfile);

/// Scalar diagnostics of a computed wave.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CwWaveSummary {
    pub c: f64,
    pub mu: f64,
    pub residual_norm: f64,
    pub residual_tolerance: f64,
    pub left_state: f64,
    pub decay_ratio: f64,
    pub outer_iterations: usize,
    pub in_envelope: bool,
}

/// Construct the wave of speed `c` on the default grid with spacing `dx`
/// (`dx <= 0` selects the library default).
///
/// # Safety
/// `params` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cw_wave_solve(params: *const CwParams, c: f64, dx: f64, out: *mut *mut CwWave) -> CwStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let p = unsafe { deref(params, "params") }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut opts = WaveOptions::default();
        if dx > 0.0 {
            opts.dx = dx;
        }
        let w = lib(wave::fixed_point_wave(&p.0, c, None, &opts))?;
        // SAFETY: checked non-null above.
        unsafe { write(out, Box::into_raw(Box::new(CwWave(w))), "out") }
    })
}

/// Release a wave handle.
///
/// # Safety
/// `wave` must be NULL or a handle from [`cw_wave_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cw_wave_free(wave: *mut CwWave) {
    if !wave.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(wave) });
    }
}

/// Number of grid points of the wave (0 for NULL).
///
/// # Safety
/// `wave` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_wave_len(wave: *const CwWave) -> usize {
    // SAFETY: forwarded caller contract.
    unsafe { wave.as_ref() }.map_or(0, |w| w.0.u.len())
}

/// # Safety
/// `wave` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cw_wave_summary(wave: *const CwWave, out: *mut CwWaveSummary) -> CwStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let w = &unsafe { deref(wave, "wave") }?.0;
        let s = CwWaveSummary {
            c: w.c,
            mu: w.mu,
            residual_norm: w.residual_norm,
            residual_tolerance: w.residual_tolerance,
            left_state: w.left_state,
            decay_ratio: w.decay_ratio,
            outer_iterations: w.outer_iterations,
            in_envelope: w.in_envelope,
        };
        // SAFETY: forwarded caller contract.
        unsafe { write(out, s, "out") }
    })
}

/// Copy grid points and the `u`, `v` profiles into caller buffers of length
/// `len`. Any of the three buffers may be NULL to skip it. Fails with
/// `CW_STATUS_BUFFER_TOO_SMALL` when `len < cw_wave_len(wave)`.
///
/// # Safety
/// `wave` must be a live handle; non-NULL buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cw_wave_copy(
    wave: *const CwWave,
    x: *mut f64,
    u: *mut f64,
    v: *mut f64,
    len: usize,
) -> CwStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let w = &unsafe { deref(wave, "wave") }?.0;
        let n = w.u.len();
        if len < n {
            return Err((CwStatus::BufferTooSmall, format!("need {n} elements, got {len}")));
        }
        // SAFETY: each non-NULL buffer holds at least `len >= n` doubles.
        unsafe {
            if !x.is_null() {
                for i in 0..n {
                    *x.add(i) = w.u.x(i);
                }
            }
            if !u.is_null() {
                std::ptr::copy_nonoverlapping(w.u.values.as_ptr(), u, n);
            }
            if !v.is_null() {
                std::ptr::copy_nonoverlapping(w.v.values.as_ptr(), v, n);
            }
        }
        Ok(())
    })
}
