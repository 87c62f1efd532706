//! C interface to the MHD boundary-layer simulator.
//!
//! Every function returns an [`MhdblStatus`]; on failure the message is
//! available from [`mhdbl_last_error`] on the same thread. Simulations are
//! opaque handles created by [`mhdbl_sim_new`] or [`mhdbl_sim_load_checkpoint`]
//! and released with [`mhdbl_sim_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use mhdbl_core::config::RunConfig;
use mhdbl_core::run::build_simulation;
use mhdbl_core::scenario::derived_exponents;
use mhdbl_core::solver::checkpoint;
use mhdbl_core::solver::Simulation;
use mhdbl_core::verify::{fit_power_law, sup_constants};
use mhdbl_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MhdblStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    TStarReached = 4,
    Divergence = 5,
    Io = 6,
    Checkpoint = 7,
    Numerical = 8,
    Panic = 9,
}

/// Opaque simulation handle.
pub struct MhdblSim {
    sim: Simulation,
    config_text: String,
}

/// One row of the norm time series.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MhdblSample {
    pub t: f64,
    pub theta: f64,
    pub radius: f64,
    pub norm_ub: f64,
    pub norm_gh: f64,
    pub norm_dy_gh: f64,
    pub norm_phipsi: f64,
    pub cl_dyub_sq: f64,
}

/// Decay exponents; a `has_*` flag of 0 means κ is outside that branch.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MhdblExponents {
    pub has_l_kappa: u8,
    pub l_kappa: f64,
    pub has_ell_kappa: u8,
    pub ell_kappa: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MhdblSupConstants {
    pub sup1: f64,
    pub argmax1: f64,
    pub sup2: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MhdblFit {
    pub exponent: f64,
    pub stderr: f64,
    pub samples: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MhdblStatus {
    match e {
        Error::Config { .. }
        | Error::InvalidGrid(_)
        | Error::InvalidParams(_)
        | Error::UnsupportedScenario(_)
        | Error::InitialData(_)
        | Error::InsufficientResolution(_)
        | Error::InsufficientSamples { .. } => MhdblStatus::Config,
        Error::TStarReached { .. } => MhdblStatus::TStarReached,
        Error::Divergence { .. } => MhdblStatus::Divergence,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => MhdblStatus::Io,
        Error::Checkpoint(_) => MhdblStatus::Checkpoint,
        _ => MhdblStatus::Numerical,
    }
}

enum Failure {
    Status(MhdblStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MhdblStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MhdblStatus::Ok
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            MhdblStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(MhdblStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(MhdblStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn sim_ref<'a>(p: *const MhdblSim) -> Result<&'a MhdblSim, Failure> {
    p.as_ref().ok_or_else(|| null("simulation handle"))
}

unsafe fn sim_mut<'a>(p: *mut MhdblSim) -> Result<&'a mut MhdblSim, Failure> {
    p.as_mut().ok_or_else(|| null("simulation handle"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread (empty after a success).
/// Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn mhdbl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a simulation from `key = value` config text.
///
/// # Safety
/// `config` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhdbl_sim_new(config: *const c_char, out: *mut *mut MhdblSim) -> MhdblStatus {
    guard(|| {
        let text = str_arg(config, "config")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = RunConfig::parse(text)?;
        let sim = build_simulation(&cfg)?;
        let handle = Box::new(MhdblSim {
            sim,
            config_text: cfg.to_text(),
        });
        out.write(Box::into_raw(handle));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `sim` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mhdbl_sim_free(sim: *mut MhdblSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Takes `steps` steps of the size chosen by the step policy.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mhdbl_sim_step(sim: *mut MhdblSim, steps: u64) -> MhdblStatus {
    guard(|| {
        let s = &mut sim_mut(sim)?.sim;
        for _ in 0..steps {
            let dt = s.policy_dt();
            s.step_dt(dt)?;
        }
        Ok(())
    })
}

/// Advances to time `t`, recording samples on the configured interval.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mhdbl_sim_run_until(sim: *mut MhdblSim, t: f64) -> MhdblStatus {
    guard(|| Ok(sim_mut(sim)?.sim.run_until(t)?))
}

/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhdbl_sim_time(sim: *const MhdblSim, out: *mut f64) -> MhdblStatus {
    guard(|| write(out, sim_ref(sim)?.sim.state.t, "out"))
}

/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhdbl_sim_theta(sim: *const MhdblSim, out: *mut f64) -> MhdblStatus {
    guard(|| write(out, sim_ref(sim)?.sim.state.theta, "out"))
}

/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhdbl_sim_sample_count(sim: *const MhdblSim, out: *mut u64) -> MhdblStatus {
    guard(|| write(out, sim_ref(sim)?.sim.series.samples.len() as u64, "out"))
}

/// Copies sample `index` of the norm series.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhdbl_sim_sample(sim: *const MhdblSim, index: u64, out: *mut MhdblSample) -> MhdblStatus {
    guard(|| {
        let samples = &sim_ref(sim)?.sim.series.samples;
        let s = samples.get(index as usize).ok_or_else(|| {
            Failure::Core(Error::Config {
                key: "index".into(),
                reason: format!("{index} out of range ({} samples)", samples.len()),
            })
        })?;
        let row = MhdblSample {
            t: s.t,
            theta: s.theta,
            radius: s.radius,
            norm_ub: s.norm_ub,
            norm_gh: s.norm_gh,
            norm_dy_gh: s.norm_dy_gh,
            norm_phipsi: s.norm_phipsi,
            cl_dyub_sq: s.cl_dyub_sq,
        };
        write(out, row, "out")
    })
}

/// # Safety
/// `sim` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mhdbl_sim_save_checkpoint(sim: *const MhdblSim, path: *const c_char) -> MhdblStatus {
    guard(|| {
        let h = sim_ref(sim)?;
        let path = str_arg(path, "path")?;
        Ok(checkpoint::save(&h.sim, &h.config_text, Path::new(path))?)
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhdbl_sim_load_checkpoint(path: *const c_char, out: *mut *mut MhdblSim) -> MhdblStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (sim, config_text) = checkpoint::load(Path::new(path))?;
        out.write(Box::into_raw(Box::new(MhdblSim { sim, config_text })));
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhdbl_derived_exponents(kappa: f64, out: *mut MhdblExponents) -> MhdblStatus {
    guard(|| {
        let e = derived_exponents(kappa)?;
        let value = MhdblExponents {
            has_l_kappa: e.l_kappa.is_some() as u8,
            l_kappa: e.l_kappa.unwrap_or(f64::NAN),
            has_ell_kappa: e.ell_kappa.is_some() as u8,
            ell_kappa: e.ell_kappa.unwrap_or(f64::NAN),
        };
        write(out, value, "out")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhdbl_sup_constants(out: *mut MhdblSupConstants) -> MhdblStatus {
    guard(|| {
        let s = sup_constants();
        write(
            out,
            MhdblSupConstants {
                sup1: s.sup1,
                argmax1: s.argmax1,
                sup2: s.sup2,
            },
            "out",
        )
    })
}

/// Least-squares fit of `values ≈ C⟨t⟩^p` over `[t_start, t_end]`.
///
/// # Safety
/// `times` and `values` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhdbl_fit_decay(
    times: *const f64,
    values: *const f64,
    n: usize,
    t_start: f64,
    t_end: f64,
    out: *mut MhdblFit,
) -> MhdblStatus {
    guard(|| {
        if times.is_null() {
            return Err(null("times"));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        let (ts, vs) = (std::slice::from_raw_parts(times, n), std::slice::from_raw_parts(values, n));
        let fit = fit_power_law(ts, vs, (t_start, t_end))?;
        write(
            out,
            MhdblFit {
                exponent: fit.exponent,
                stderr: fit.stderr,
                samples: fit.samples as u64,
            },
            "out",
        )
    })
}
