//! C interface to the nonlocal SIR solver.
//!
//! Every function returns an [`NsStatus`]. On failure the message is kept
//! per thread and can be read with [`ns_last_error`]. Solvers are opaque
//! handles created by `ns_solver_new*` and released with [`ns_solver_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nonlocal_sir::cubature::erf_test;
use nonlocal_sir::harness::{initial_state, ExperimentConfig};
use nonlocal_sir::integrators::{adaptive_bound, improved_bound, Stepper};
use nonlocal_sir::properties::{check_step, Tolerances};
use nonlocal_sir::{CubatureRule, Error, RuleKind, SemiDiscrete, State};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    InvalidArgument = 1,
    Precondition = 2,
    UnknownMethod = 3,
    PropertyViolation = 4,
    Io = 5,
    Config = 6,
    NullPointer = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsSpecies {
    S = 0,
    I = 1,
    R = 2,
}

/// Step-size bounds, see `ns_solver_bounds`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NsBounds {
    pub adaptive: f64,
    pub improved: f64,
    pub pessimistic: f64,
    pub rk_scaled: f64,
}

/// Outcome of the property check for the last step. Flags are 1 when the
/// property holds.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NsReport {
    pub step: usize,
    pub d1: u8,
    pub d2: u8,
    pub d3: u8,
    pub d4: u8,
    pub worst_negative: f64,
    pub conservation_drift: f64,
}

/// Opaque solver handle.
pub struct NsSolver {
    sd: SemiDiscrete,
    stepper: Stepper,
    state: State,
    initial: State,
    tol: Tolerances,
    steps: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> NsStatus {
    match err {
        Error::InvalidArgument(_) => NsStatus::InvalidArgument,
        Error::Precondition(_) => NsStatus::Precondition,
        Error::UnknownMethod(_) => NsStatus::UnknownMethod,
        Error::PropertyViolation { .. } => NsStatus::PropertyViolation,
        Error::Config(_) => NsStatus::Config,
        Error::Io(_) => NsStatus::Io,
    }
}

enum Failure {
    Core(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NsStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            NsStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic");
            NsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Core(Error::InvalidArgument(format!("{what} is not UTF-8"))))
}

fn build(cfg: ExperimentConfig) -> Result<NsSolver, Error> {
    cfg.validate()?;
    let sd = cfg.semi_discrete()?;
    let stepper = cfg.make_stepper()?;
    let state = initial_state(&cfg)?;
    let tol = cfg.tolerances(&state);
    Ok(NsSolver {
        sd,
        stepper,
        initial: state.clone(),
        state,
        tol,
        steps: 0,
    })
}

fn install(solver: NsSolver, out: *mut *mut NsSolver) {
    // SAFETY: callers check `out` before building.
    unsafe { *out = Box::into_raw(Box::new(solver)) };
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ns_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Solver with the default configuration.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ns_solver_new_default(out: *mut *mut NsSolver) -> NsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        install(build(ExperimentConfig::default())?, out);
        Ok(())
    })
}

/// Solver from a TOML configuration document.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ns_solver_new(toml: *const c_char, out: *mut *mut NsSolver) -> NsStatus {
    guard(|| {
        let text = str_arg(toml, "toml")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        install(build(ExperimentConfig::from_toml_str(text)?)?, out);
        Ok(())
    })
}

/// # Safety
/// `solver` must come from `ns_solver_new*` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ns_solver_free(solver: *mut NsSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Grid dimensions; field buffers hold `p1 * p2` values, row-major in the first index.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ns_solver_shape(
    solver: *const NsSolver,
    p1: *mut usize,
    p2: *mut usize,
) -> NsStatus {
    guard(|| {
        let g = deref(solver, "solver")?.state.grid();
        *deref_mut(p1, "p1")? = g.p1;
        *deref_mut(p2, "p2")? = g.p2;
        Ok(())
    })
}

/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ns_solver_time(solver: *const NsSolver, t: *mut f64) -> NsStatus {
    guard(|| {
        *deref_mut(t, "t")? = deref(solver, "solver")?.state.t;
        Ok(())
    })
}

/// Copy one species into `buf`, which must hold at least `p1 * p2` values.
///
/// # Safety
/// `buf` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ns_solver_field(
    solver: *const NsSolver,
    species: NsSpecies,
    buf: *mut f64,
    len: usize,
) -> NsStatus {
    guard(|| {
        let s = deref(solver, "solver")?;
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        let f = match species {
            NsSpecies::S => &s.state.s,
            NsSpecies::I => &s.state.i,
            NsSpecies::R => &s.state.r,
        };
        if len < f.values.len() {
            return Err(Error::InvalidArgument(format!(
                "buffer holds {len}, need {}",
                f.values.len()
            ))
            .into());
        }
        ptr::copy_nonoverlapping(f.values.as_ptr(), buf, f.values.len());
        Ok(())
    })
}

/// Advance one step of size `tau` and check the discrete properties.
/// A failed check still advances the state and returns `PropertyViolation`.
///
/// # Safety
/// `solver` must be valid; `report` may be null.
#[no_mangle]
pub unsafe extern "C" fn ns_solver_step(
    solver: *mut NsSolver,
    tau: f64,
    report: *mut NsReport,
) -> NsStatus {
    guard(|| {
        let s = deref_mut(solver, "solver")?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")).into());
        }
        let next = s.stepper.step(&s.sd, &s.state, tau)?;
        let mut rep = check_step(&s.state, &next, s.tol.neg, s.tol.cons)?;
        s.steps += 1;
        rep.step = s.steps;
        s.state = next;
        if let Some(out) = report.as_mut() {
            *out = NsReport {
                step: rep.step,
                d1: rep.d1_ok as u8,
                d2: rep.d2_ok as u8,
                d3: rep.d3_ok as u8,
                d4: rep.d4_ok as u8,
                worst_negative: rep.worst_negative,
                conservation_drift: rep.conservation_drift,
            };
        }
        if rep.all_ok() {
            Ok(())
        } else {
            Err(Error::PropertyViolation {
                step: rep.step,
                detail: rep.describe(),
            }
            .into())
        }
    })
}

/// Bounds for the configured stepper. `adaptive` uses the current state,
/// the others the initial one.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ns_solver_bounds(solver: *const NsSolver, out: *mut NsBounds) -> NsStatus {
    guard(|| {
        let s = deref(solver, "solver")?;
        let out = deref_mut(out, "out")?;
        let b = improved_bound(&s.initial, &s.sd, s.stepper.ssp_c())?;
        let t = s.sd.t_field(&s.state.i)?;
        *out = NsBounds {
            adaptive: adaptive_bound(&t, s.sd.params()),
            improved: b.improved,
            pessimistic: b.pessimistic,
            rk_scaled: b.rk_scaled,
        };
        Ok(())
    })
}

/// Absolute error of a disk rule on the Gaussian test integral.
///
/// # Safety
/// `kind` must be a NUL-terminated string and `err` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ns_cubature_error(
    kind: *const c_char,
    n: usize,
    delta: f64,
    sigma: f64,
    err: *mut f64,
) -> NsStatus {
    guard(|| {
        let kind: RuleKind = str_arg(kind, "kind")?.parse()?;
        let err = deref_mut(err, "err")?;
        if !(sigma > 0.0) {
            return Err(
                Error::InvalidArgument(format!("sigma must be positive, got {sigma}")).into(),
            );
        }
        let rule = CubatureRule::new(kind, n, delta)?;
        *err = (rule.integrate(erf_test::integrand(delta, sigma)) - erf_test::exact(delta, sigma))
            .abs();
        Ok(())
    })
}
