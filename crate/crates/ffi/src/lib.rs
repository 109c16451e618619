//! C ABI over `sqzent`.
//!
//! A model is an opaque `SqzModel` handle created by `sqz_model_new` and
//! released with `sqz_model_free`. Every fallible call returns an `SqzStatus`;
//! results go through caller-provided output pointers, which are left
//! untouched on failure. `sqz_last_error` returns a description of the most
//! recent failure on the calling thread. Panics never cross the boundary; they
//! are reported as `SQZ_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sqzent::analytic::{self, CriticalTemperature};
use sqzent::labframe::{find_periodic_steady_state, FloquetSettings, LabFrameProblem, Representation};
use sqzent::{
    log_negativity, steady_state, symplectic_eigenvalues, BathSpec, Complex, CovarianceMatrix,
    DerivedBath, Error, SystemParams,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotStable = 3,
    UnphysicalBath = 4,
    NoConvergence = 5,
    NotPositiveDefinite = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqzRepresentation {
    /// Rotating frame with time-dependent anomalous correlations.
    RotatingM = 0,
    /// Laboratory quadratures with constant diffusion.
    LabQuadratures = 1,
}

/// Opaque model: oscillator parameters plus one bath per mode (vacuum by default).
pub struct SqzModel {
    sys: SystemParams,
    specs: [Option<BathSpec>; 2],
    baths: [DerivedBath; 2],
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SqzStatus {
    match e {
        Error::InvalidParameter { .. }
        | Error::NotSymmetric { .. }
        | Error::StepTooLarge { .. }
        | Error::NonResonant { .. } => SqzStatus::InvalidArgument,
        Error::NotStable { .. } => SqzStatus::NotStable,
        Error::UnphysicalBath(_) => SqzStatus::UnphysicalBath,
        Error::NoConvergence { .. } | Error::NonMonotone { .. } => SqzStatus::NoConvergence,
        Error::NotPositiveDefinite { .. } => SqzStatus::NotPositiveDefinite,
        Error::Numerical(_) => SqzStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F>(f: F) -> SqzStatus
where
    F: FnOnce() -> Result<(), (SqzStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            SqzStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            SqzStatus::Internal
        }
    }
}

fn lift(e: Error) -> (SqzStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SqzStatus, String) {
    (SqzStatus::NullPointer, format!("`{what}` is null"))
}

fn bad_index(index: u32) -> (SqzStatus, String) {
    (SqzStatus::InvalidArgument, format!("bath index {index} is not 1 or 2"))
}

/// Creates a model with vacuum baths. On success `*out` owns a new handle.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn sqz_model_new(
    omega1: f64,
    omega2: f64,
    coupling: f64,
    gamma1: f64,
    gamma2: f64,
    out: *mut *mut SqzModel,
) -> SqzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sys = SystemParams::new(omega1, omega2, coupling, gamma1, gamma2).map_err(lift)?;
        let model = Box::new(SqzModel {
            sys,
            specs: [Some(BathSpec::vacuum()); 2],
            baths: [DerivedBath::VACUUM; 2],
        });
        *out = Box::into_raw(model);
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from `sqz_model_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sqz_model_free(model: *mut SqzModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Squeezed thermal bath on mode `index` (1 or 2).
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sqz_model_set_bath(
    model: *mut SqzModel,
    index: u32,
    nbar: f64,
    r: f64,
    phi: f64,
) -> SqzStatus {
    guard(|| {
        let model = model.as_mut().ok_or_else(|| null("model"))?;
        let k = slot(index)?;
        let spec = BathSpec::new(nbar, r, phi).map_err(lift)?;
        model.specs[k] = Some(spec);
        model.baths[k] = spec.derive();
        Ok(())
    })
}

/// Bath on mode `index` given directly by `N` and `M = m_re + i m_im`.
/// Physicality is checked when the model is solved.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sqz_model_set_bath_raw(
    model: *mut SqzModel,
    index: u32,
    n: f64,
    m_re: f64,
    m_im: f64,
) -> SqzStatus {
    guard(|| {
        let model = model.as_mut().ok_or_else(|| null("model"))?;
        let k = slot(index)?;
        model.specs[k] = None;
        model.baths[k] = DerivedBath::raw(n, Complex::new(m_re, m_im));
        Ok(())
    })
}

fn slot(index: u32) -> Result<usize, (SqzStatus, String)> {
    match index {
        1 | 2 => Ok(index as usize - 1),
        _ => Err(bad_index(index)),
    }
}

fn solve(model: &SqzModel) -> Result<CovarianceMatrix, (SqzStatus, String)> {
    for bath in &model.baths {
        bath.check_physical().map_err(lift)?;
    }
    steady_state(&model.sys, &model.baths[0], &model.baths[1]).map_err(lift)
}

/// Rotating-frame steady covariance, 16 entries row-major in `(x1, p1, x2, p2)`.
///
/// # Safety
/// `model` must be null or a live handle; `out_v` null or valid for 16 writes.
#[no_mangle]
pub unsafe extern "C" fn sqz_model_steady_state(model: *const SqzModel, out_v: *mut f64) -> SqzStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out_v.is_null() {
            return Err(null("out_v"));
        }
        let v = solve(model)?.to_row_major();
        std::ptr::copy_nonoverlapping(v.as_ptr(), out_v, 16);
        Ok(())
    })
}

/// Smallest partially transposed symplectic eigenvalue and logarithmic negativity.
///
/// # Safety
/// `model` must be null or a live handle; outputs null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sqz_model_log_negativity(
    model: *const SqzModel,
    out_nu_minus: *mut f64,
    out_log_negativity: *mut f64,
) -> SqzStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out_nu_minus.is_null() || out_log_negativity.is_null() {
            return Err(null("output"));
        }
        let e = log_negativity(&solve(model)?).map_err(lift)?;
        *out_nu_minus = e.nu_minus;
        *out_log_negativity = e.log_negativity;
        Ok(())
    })
}

/// Lab-frame periodic steady state with default integration settings:
/// mean, minimum and maximum of the logarithmic negativity over one period.
/// Requires `omega1 == omega2` and squeezed thermal (not raw) baths.
///
/// # Safety
/// `model` must be null or a live handle; outputs null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sqz_model_labframe(
    model: *const SqzModel,
    representation: SqzRepresentation,
    out_mean: *mut f64,
    out_min: *mut f64,
    out_max: *mut f64,
) -> SqzStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out_mean.is_null() || out_min.is_null() || out_max.is_null() {
            return Err(null("output"));
        }
        let [Some(b1), Some(b2)] = model.specs else {
            return Err((SqzStatus::InvalidArgument, "lab frame needs squeezed thermal baths".into()));
        };
        let repr = match representation {
            SqzRepresentation::RotatingM => Representation::RotatingWithTimeDependentM,
            SqzRepresentation::LabQuadratures => Representation::LabQuadratures,
        };
        let problem = LabFrameProblem::new(model.sys, b1, b2, repr).map_err(lift)?;
        let pss = find_periodic_steady_state(&problem, &FloquetSettings::default()).map_err(lift)?;
        *out_mean = pss.en_mean;
        *out_min = pss.en_min;
        *out_max = pss.en_max;
        Ok(())
    })
}

/// Symplectic eigenvalues (ascending) of a row-major 4×4 covariance matrix.
///
/// # Safety
/// `v` must be null or valid for 16 reads; `out` null or valid for 2 writes.
#[no_mangle]
pub unsafe extern "C" fn sqz_symplectic_eigenvalues(v: *const f64, out: *mut f64) -> SqzStatus {
    guard(|| {
        if v.is_null() || out.is_null() {
            return Err(null("v/out"));
        }
        let mut entries = [0.0; 16];
        std::ptr::copy_nonoverlapping(v, entries.as_mut_ptr(), 16);
        let cm = CovarianceMatrix::from_row_slice(&entries).map_err(lift)?;
        let nu = symplectic_eigenvalues(cm.matrix()).map_err(lift)?;
        std::ptr::copy_nonoverlapping(nu.as_ptr(), out, 2);
        Ok(())
    })
}

/// `R(r, J)` of the symmetric resonant closed form; NaN for invalid input.
#[no_mangle]
pub extern "C" fn sqz_r_function(gamma: f64, coupling: f64, r: f64) -> f64 {
    if !(gamma > 0.0 && coupling >= 0.0 && r >= 0.0) {
        return f64::NAN;
    }
    catch_unwind(|| analytic::r_function(gamma, coupling, r)).unwrap_or(f64::NAN)
}

/// Closed-form critical temperature. `*out_finite` is false when the state is
/// separable at every temperature, in which case `*out_tc` is set to 0.
///
/// # Safety
/// Outputs must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sqz_critical_temperature(
    gamma: f64,
    coupling: f64,
    r: f64,
    omega: f64,
    out_tc: *mut f64,
    out_finite: *mut bool,
) -> SqzStatus {
    guard(|| {
        if out_tc.is_null() || out_finite.is_null() {
            return Err(null("output"));
        }
        analytic::SymmetricCase::new(omega, gamma, coupling, r, 0.0).map_err(lift)?;
        match analytic::critical_temperature(gamma, coupling, r, omega) {
            CriticalTemperature::Finite(t) => {
                *out_tc = t;
                *out_finite = true;
            }
            CriticalTemperature::NoEntanglement => {
                *out_tc = 0.0;
                *out_finite = false;
            }
        }
        Ok(())
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn sqz_status_message(status: SqzStatus) -> *const c_char {
    let s: &'static CStr = match status {
        SqzStatus::Ok => c"ok",
        SqzStatus::NullPointer => c"null pointer argument",
        SqzStatus::InvalidArgument => c"invalid argument",
        SqzStatus::NotStable => c"drift matrix is not Hurwitz",
        SqzStatus::UnphysicalBath => c"unphysical bath",
        SqzStatus::NoConvergence => c"periodic steady state did not converge",
        SqzStatus::NotPositiveDefinite => c"matrix is not positive definite",
        SqzStatus::Internal => c"internal error",
    };
    s.as_ptr()
}

/// Detail of the last failure on this thread, empty after a success. The
/// pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sqz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn sqz_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => c"unknown",
    };
    VERSION.as_ptr()
}
