//! C ABI for the capspectra engine.
//!
//! Configurations and runs are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`CsStatus`]; on failure a description is available from
//! [`cs_last_error_message`] on the same thread until the next failing call.
//! Strings returned as `char *` are released with [`cs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use capspectra::eigenbasis::EigenBasis;
use capspectra::export::write_run;
use capspectra::pipeline::{run_scenario, RunRecord};
use capspectra::scenario::ScenarioConfig;
use capspectra::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

/// Opaque scenario configuration.
pub struct CsConfig {
    inner: ScenarioConfig,
}

/// Opaque completed run.
pub struct CsRun {
    inner: RunRecord,
}

/// Scalar results of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CsTotals {
    pub p2: f64,
    pub p1: f64,
    pub p0: f64,
    pub norm2_final: f64,
    /// NaN when the run did not propagate the one-particle density.
    pub residual_final: f64,
    pub neg_content: f64,
    pub extent: f64,
    pub duration: f64,
    pub duration_reached: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> CsStatus {
    match err {
        Error::Grid(_)
        | Error::Parameter { .. }
        | Error::Config(_)
        | Error::Parse { .. }
        | Error::PacketInCap { .. } => CsStatus::Config,
        Error::Io { .. } => CsStatus::Io,
        _ => CsStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (CsStatus, String)>) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CsStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CsStatus::Panic
        }
    }
}

fn fail(err: Error) -> (CsStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (CsStatus, String) {
    (CsStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (CsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (CsStatus::InvalidArgument, format!("`{what}` is not valid UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// Description of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn cs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Built-in scenario by name (`scattering`, `scattering-double`, `photo03`,
/// `photo10`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_config_preset(name: *const c_char, out: *mut *mut CsConfig) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = str_arg(name, "name")?;
        let inner = ScenarioConfig::preset(name).map_err(fail)?;
        *out = Box::into_raw(Box::new(CsConfig { inner }));
        Ok(())
    })
}

/// Parse and validate a TOML scenario.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_config_from_toml(text: *const c_char, out: *mut *mut CsConfig) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(text, "text")?;
        let inner = ScenarioConfig::from_toml(text, Path::new("<memory>")).map_err(fail)?;
        *out = Box::into_raw(Box::new(CsConfig { inner }));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn cs_config_free(cfg: *mut CsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Replace the absorber-strength ladder.
///
/// # Safety
/// `cfg` must be a live handle; `values` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cs_config_set_gamma0(cfg: *mut CsConfig, values: *const f64, len: usize) -> CsStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        if values.is_null() || len == 0 {
            return Err((CsStatus::InvalidArgument, "need at least one gamma0 value".into()));
        }
        let mut next = cfg.inner.clone();
        next.cap.gamma0 = std::slice::from_raw_parts(values, len).to_vec();
        next.validate().map_err(fail)?;
        cfg.inner = next;
        Ok(())
    })
}

/// Set the time step and the maximum propagation time.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_config_set_time(cfg: *mut CsConfig, tau: f64, t_max: f64) -> CsStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let mut next = cfg.inner.clone();
        next.propagation.tau = tau;
        next.propagation.t_max = t_max;
        next.validate().map_err(fail)?;
        cfg.inner = next;
        Ok(())
    })
}

/// The configuration as TOML; release with [`cs_string_free`]. Null on a
/// null handle.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_config_to_toml(cfg: *const CsConfig) -> *mut c_char {
    match cfg.as_ref() {
        Some(cfg) => into_c_string(cfg.inner.to_toml()),
        None => std::ptr::null_mut(),
    }
}

/// SHA-256 of the configuration (hex); release with [`cs_string_free`].
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_config_hash(cfg: *const CsConfig) -> *mut c_char {
    match cfg.as_ref() {
        Some(cfg) => into_c_string(cfg.inner.hash()),
        None => std::ptr::null_mut(),
    }
}

/// Lowest eigenvalue of the one-body Hamiltonian on the configured grid.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_config_ground_energy(cfg: *const CsConfig, out: *mut f64) -> CsStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let grid = cfg.inner.build_grid().map_err(fail)?;
        let basis = EigenBasis::from_potential(&grid, &cfg.inner.potential).map_err(fail)?;
        *out = basis.energies()[0];
        Ok(())
    })
}

/// Run the scenario at one absorber strength. Blocks until done.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_run(cfg: *const CsConfig, gamma0: f64, out: *mut *mut CsRun) -> CsStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut single = cfg.inner.clone();
        single.cap.gamma0 = vec![gamma0];
        single.validate().map_err(fail)?;
        let inner = run_scenario(&single, gamma0).map_err(fail)?;
        *out = Box::into_raw(Box::new(CsRun { inner }));
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn cs_run_free(run: *mut CsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_run_totals(run: *const CsRun, out: *mut CsTotals) -> CsStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = &run.inner.scalars;
        *out = CsTotals {
            p2: s.p2,
            p1: s.p1,
            p0: s.p0_final,
            norm2_final: s.norm2_final,
            residual_final: s.residual_final.unwrap_or(f64::NAN),
            neg_content: s.neg_content,
            extent: s.extent,
            duration: s.duration,
            duration_reached: s.duration_reached,
        };
        Ok(())
    })
}

/// Number of energy samples in the run's spectra; 0 on a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_run_spectrum_len(run: *const CsRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.first.len())
}

/// Copy the spectra into caller buffers of exactly `len` doubles each.
///
/// # Safety
/// `run` must be a live handle; each buffer must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cs_run_spectrum(
    run: *const CsRun,
    energy: *mut f64,
    dp2_de: *mut f64,
    dp1_de: *mut f64,
    len: usize,
) -> CsStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        if energy.is_null() || dp2_de.is_null() || dp1_de.is_null() {
            return Err(null("buffer"));
        }
        let first = &run.inner.first;
        if len != first.len() {
            return Err((
                CsStatus::InvalidArgument,
                format!("buffers hold {len} values, spectrum has {}", first.len()),
            ));
        }
        let second = &run.inner.second;
        for i in 0..len {
            *energy.add(i) = first.energies[i];
            *dp2_de.add(i) = first.density[i];
            *dp1_de.add(i) = second.at(first.energies[i]);
        }
        Ok(())
    })
}

/// Write `spectrum.csv` and `metadata.json` into `dir`.
///
/// # Safety
/// `run` must be a live handle; `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn cs_run_write(run: *const CsRun, dir: *const c_char) -> CsStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let dir = str_arg(dir, "dir")?;
        write_run(&run.inner, Path::new(dir)).map_err(fail)?;
        Ok(())
    })
}
