//! C ABI over the flexjoint simulation library.
//!
//! Conventions:
//! * Handles (`FjScenario`, `FjLog`) are opaque; create/free them only
//!   through this API. They are not thread-safe to mutate concurrently.
//! * Every fallible call returns an [`FjStatus`]; on failure a
//!   thread-local message is retrievable via [`fj_last_error_message`]
//!   (valid until the next failing call on the same thread).
//! * Strings are NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use flexjoint::harness::{
    compute_metrics, run_scenario, FeedbackKind, FeedforwardKind, ScenarioConfig, SimLog,
};
use flexjoint::params::named_set;
use flexjoint::plant::PlantLaw;
use flexjoint::trajectory::{preset, ReferenceSource};
use flexjoint::Error;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FjStatus {
    Ok = 0,
    /// Null pointer, bad enum value, malformed string.
    InvalidArgument = 1,
    /// Parameter or configuration outside its admissible range.
    Domain = 2,
    /// Numerical fault while running (non-finite state, solver failure).
    Runtime = 3,
    /// I/O failure.
    Io = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: FjStatus, msg: impl Into<Vec<u8>>) -> FjStatus {
    set_error(msg);
    status
}

fn fail_with(e: &Error) -> FjStatus {
    let status = match e {
        Error::Domain(_) | Error::Config(_) => FjStatus::Domain,
        Error::Integration { .. } | Error::Controller { .. } => FjStatus::Runtime,
        Error::Io(_) => FjStatus::Io,
    };
    fail(status, e.to_string())
}

/// Returns the message of the last error on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn fj_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// An owned, configurable simulation scenario.
pub struct FjScenario {
    config: ScenarioConfig,
    source: Box<dyn ReferenceSource + Send + Sync>,
}

/// An owned simulation log.
pub struct FjLog {
    log: SimLog,
    dt_ctrl: f64,
}

/// Per-joint summary metrics of a finished run.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FjMetrics {
    /// Maximum absolute link tracking error (deg).
    pub max_err_deg: f64,
    /// Mean absolute link tracking error (deg).
    pub mean_err_deg: f64,
    /// Largest elastic-torque peak-to-peak swing after a reference velocity
    /// reversal (N·m).
    pub reversal_tau_e_p2p: f64,
    /// Maximum commanded torque slew rate (N·m/s).
    pub max_tau_rate: f64,
}

unsafe fn cstr<'a>(p: *const c_char) -> Option<&'a str> {
    if p.is_null() {
        return None;
    }
    CStr::from_ptr(p).to_str().ok()
}

/// Creates a scenario from a named parameter set and trajectory preset.
/// On success writes the new handle to `out`.
///
/// # Safety
/// `param_set` and `preset_name` must be NUL-terminated strings; `out` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fj_scenario_new(
    param_set: *const c_char,
    preset_name: *const c_char,
    amplitude: f64,
    out: *mut *mut FjScenario,
) -> FjStatus {
    if out.is_null() {
        return fail(FjStatus::InvalidArgument, "out is NULL");
    }
    let Some(set) = cstr(param_set) else {
        return fail(FjStatus::InvalidArgument, "param_set is NULL or not UTF-8");
    };
    let Some(pre) = cstr(preset_name) else {
        return fail(FjStatus::InvalidArgument, "preset_name is NULL or not UTF-8");
    };
    let Some(mut joints) = named_set(set) else {
        return fail(FjStatus::Domain, format!("unknown parameter set '{set}'"));
    };
    let Some(source) = preset(pre, amplitude) else {
        return fail(FjStatus::Domain, format!("unknown trajectory preset '{pre}'"));
    };
    if source.joints() != joints.len() {
        if joints.len() == 1 {
            joints = vec![joints[0]; source.joints()];
        } else {
            return fail(
                FjStatus::Domain,
                format!("preset drives {} joints, set has {}", source.joints(), joints.len()),
            );
        }
    }
    let scenario = Box::new(FjScenario { config: ScenarioConfig::new(joints), source });
    *out = Box::into_raw(scenario);
    FjStatus::Ok
}

/// Selects the plant's constitutive laws: 0 = hard backlash (piecewise),
/// 1 = smooth.
///
/// # Safety
/// `s` must be a live handle from [`fj_scenario_new`].
#[no_mangle]
pub unsafe extern "C" fn fj_scenario_set_law(s: *mut FjScenario, law: i32) -> FjStatus {
    let Some(s) = s.as_mut() else {
        return fail(FjStatus::InvalidArgument, "scenario is NULL");
    };
    s.config.law = match law {
        0 => PlantLaw::Piecewise,
        1 => PlantLaw::Smooth,
        other => return fail(FjStatus::InvalidArgument, format!("unknown law {other}")),
    };
    FjStatus::Ok
}

/// Sets integrator and controller timing.
///
/// # Safety
/// `s` must be a live handle from [`fj_scenario_new`].
#[no_mangle]
pub unsafe extern "C" fn fj_scenario_set_timing(
    s: *mut FjScenario,
    dt_plant: f64,
    dt_ctrl: f64,
    duration: f64,
) -> FjStatus {
    let Some(s) = s.as_mut() else {
        return fail(FjStatus::InvalidArgument, "scenario is NULL");
    };
    s.config.dt_plant = dt_plant;
    s.config.dt_ctrl = dt_ctrl;
    s.config.duration = duration;
    match s.config.substeps() {
        Ok(_) => FjStatus::Ok,
        Err(e) => fail_with(&e),
    }
}

/// Selects the controller: feedforward 0 = none, 1 = rigid, 2 = flatness;
/// feedback 0 = none, 1 = conventional, 2 = model-based.
///
/// # Safety
/// `s` must be a live handle from [`fj_scenario_new`].
#[no_mangle]
pub unsafe extern "C" fn fj_scenario_set_controller(
    s: *mut FjScenario,
    feedforward: i32,
    feedback: i32,
) -> FjStatus {
    let Some(s) = s.as_mut() else {
        return fail(FjStatus::InvalidArgument, "scenario is NULL");
    };
    s.config.feedforward = match feedforward {
        0 => FeedforwardKind::None,
        1 => FeedforwardKind::Rigid,
        2 => FeedforwardKind::Flatness,
        other => return fail(FjStatus::InvalidArgument, format!("unknown feedforward {other}")),
    };
    s.config.feedback = match feedback {
        0 => FeedbackKind::None,
        1 => FeedbackKind::Conventional,
        2 => FeedbackKind::ModelBased,
        other => return fail(FjStatus::InvalidArgument, format!("unknown feedback {other}")),
    };
    FjStatus::Ok
}

/// Sets measurement quantization (0 disables either one).
///
/// # Safety
/// `s` must be a live handle from [`fj_scenario_new`].
#[no_mangle]
pub unsafe extern "C" fn fj_scenario_set_quantization(
    s: *mut FjScenario,
    quant_q: f64,
    quant_theta_dot: f64,
) -> FjStatus {
    let Some(s) = s.as_mut() else {
        return fail(FjStatus::InvalidArgument, "scenario is NULL");
    };
    s.config.quant_q = quant_q;
    s.config.quant_theta_dot = quant_theta_dot;
    FjStatus::Ok
}

/// Scales the plant's full-contact stiffness relative to the controller
/// model (model-mismatch studies); 1.0 restores the matched plant.
///
/// # Safety
/// `s` must be a live handle from [`fj_scenario_new`].
#[no_mangle]
pub unsafe extern "C" fn fj_scenario_set_plant_stiffness_scale(
    s: *mut FjScenario,
    scale: f64,
) -> FjStatus {
    let Some(s) = s.as_mut() else {
        return fail(FjStatus::InvalidArgument, "scenario is NULL");
    };
    if !(scale > 0.0) {
        return fail(FjStatus::Domain, "stiffness scale must be > 0");
    }
    if scale == 1.0 {
        s.config.plant_params = None;
    } else {
        let mut pp = s.config.params.clone();
        for j in &mut pp {
            j.stiffness.c_tr *= scale;
        }
        s.config.plant_params = Some(pp);
    }
    FjStatus::Ok
}

/// Runs the scenario; on success writes a new log handle to `out`.
///
/// # Safety
/// `s` must be a live handle from [`fj_scenario_new`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fj_scenario_run(s: *const FjScenario, out: *mut *mut FjLog) -> FjStatus {
    let Some(s) = s.as_ref() else {
        return fail(FjStatus::InvalidArgument, "scenario is NULL");
    };
    if out.is_null() {
        return fail(FjStatus::InvalidArgument, "out is NULL");
    }
    match run_scenario(&s.config, s.source.as_ref()) {
        Ok(log) => {
            *out = Box::into_raw(Box::new(FjLog { log, dt_ctrl: s.config.dt_ctrl }));
            FjStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

/// Number of logged control ticks.
///
/// # Safety
/// `log` must be a live handle from [`fj_scenario_run`].
#[no_mangle]
pub unsafe extern "C" fn fj_log_len(log: *const FjLog) -> usize {
    log.as_ref().map_or(0, |l| l.log.t.len())
}

/// Number of joints in the log.
///
/// # Safety
/// `log` must be a live handle from [`fj_scenario_run`].
#[no_mangle]
pub unsafe extern "C" fn fj_log_joints(log: *const FjLog) -> usize {
    log.as_ref().map_or(0, |l| l.log.joints.len())
}

/// Computes summary metrics for one joint of a finished run.
///
/// # Safety
/// `log` must be a live handle from [`fj_scenario_run`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fj_log_metrics(
    log: *const FjLog,
    joint: usize,
    out: *mut FjMetrics,
) -> FjStatus {
    let Some(l) = log.as_ref() else {
        return fail(FjStatus::InvalidArgument, "log is NULL");
    };
    if out.is_null() {
        return fail(FjStatus::InvalidArgument, "out is NULL");
    }
    let metrics = match compute_metrics(&l.log, l.dt_ctrl) {
        Ok(m) => m,
        Err(e) => return fail_with(&e),
    };
    let Some(m) = metrics.get(joint) else {
        return fail(FjStatus::InvalidArgument, format!("joint {joint} out of range"));
    };
    *out = FjMetrics {
        max_err_deg: m.max_err_deg,
        mean_err_deg: m.mean_err_deg,
        reversal_tau_e_p2p: m.reversal_tau_e_p2p,
        max_tau_rate: m.max_tau_rate,
    };
    FjStatus::Ok
}

/// Writes the full log as CSV to `path`.
///
/// # Safety
/// `log` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fj_log_write_csv(log: *const FjLog, path: *const c_char) -> FjStatus {
    let Some(l) = log.as_ref() else {
        return fail(FjStatus::InvalidArgument, "log is NULL");
    };
    let Some(p) = cstr(path) else {
        return fail(FjStatus::InvalidArgument, "path is NULL or not UTF-8");
    };
    match l.log.write_csv_file(Path::new(p)) {
        Ok(()) => FjStatus::Ok,
        Err(e) => fail_with(&e),
    }
}

/// Frees a scenario handle; NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn fj_scenario_free(s: *mut FjScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Frees a log handle; NULL is a no-op.
///
/// # Safety
/// `log` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn fj_log_free(log: *mut FjLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn full_round_trip_through_the_abi() {
        unsafe {
            let mut s: *mut FjScenario = ptr::null_mut();
            let status = fj_scenario_new(
                c("kr300-joint1").as_ptr(),
                c("demanding").as_ptr(),
                0.5,
                &mut s,
            );
            assert_eq!(status, FjStatus::Ok);
            assert_eq!(fj_scenario_set_law(s, 1), FjStatus::Ok);
            assert_eq!(fj_scenario_set_timing(s, 1e-4, 4e-4, 1.0), FjStatus::Ok);
            assert_eq!(fj_scenario_set_controller(s, 2, 0), FjStatus::Ok);

            let mut log: *mut FjLog = ptr::null_mut();
            assert_eq!(fj_scenario_run(s, &mut log), FjStatus::Ok);
            assert_eq!(fj_log_joints(log), 1);
            assert_eq!(fj_log_len(log), 2500);

            let mut m = FjMetrics {
                max_err_deg: -1.0,
                mean_err_deg: -1.0,
                reversal_tau_e_p2p: -1.0,
                max_tau_rate: -1.0,
            };
            assert_eq!(fj_log_metrics(log, 0, &mut m), FjStatus::Ok);
            assert!(m.max_err_deg >= 0.0 && m.max_err_deg < 0.05);

            let dir = std::env::temp_dir().join("fj_ffi_test.csv");
            let path = c(dir.to_str().unwrap());
            assert_eq!(fj_log_write_csv(log, path.as_ptr()), FjStatus::Ok);
            let text = std::fs::read_to_string(&dir).unwrap();
            assert!(text.starts_with("t,q_R1,"));
            std::fs::remove_file(&dir).ok();

            fj_log_free(log);
            fj_scenario_free(s);
        }
    }

    #[test]
    fn errors_set_messages_and_codes() {
        unsafe {
            let mut s: *mut FjScenario = ptr::null_mut();
            assert_eq!(
                fj_scenario_new(c("nope").as_ptr(), c("demanding").as_ptr(), 1.0, &mut s),
                FjStatus::Domain
            );
            let msg = CStr::from_ptr(fj_last_error_message()).to_str().unwrap();
            assert!(msg.contains("nope"));

            assert_eq!(
                fj_scenario_new(ptr::null(), c("demanding").as_ptr(), 1.0, &mut s),
                FjStatus::InvalidArgument
            );

            assert_eq!(
                fj_scenario_new(c("kr300-joint1").as_ptr(), c("demanding").as_ptr(), 1.0, &mut s),
                FjStatus::Ok
            );
            // Non-integer control/plant step ratio.
            assert_eq!(fj_scenario_set_timing(s, 1e-4, 2.5e-4, 1.0), FjStatus::Domain);
            assert_eq!(fj_scenario_set_law(s, 7), FjStatus::InvalidArgument);
            assert_eq!(fj_scenario_set_plant_stiffness_scale(s, -2.0), FjStatus::Domain);
            fj_scenario_free(s);

            // NULL handles are tolerated.
            assert_eq!(fj_log_len(ptr::null()), 0);
            fj_scenario_free(ptr::null_mut());
            fj_log_free(ptr::null_mut());
        }
    }

    #[test]
    fn mismatch_scale_changes_the_outcome() {
        unsafe {
            let run = |scale: f64| {
                let mut s: *mut FjScenario = ptr::null_mut();
                fj_scenario_new(c("kr300-joint1").as_ptr(), c("demanding").as_ptr(), 0.5, &mut s);
                fj_scenario_set_law(s, 1);
                fj_scenario_set_timing(s, 1e-4, 4e-4, 1.5);
                fj_scenario_set_controller(s, 2, 0);
                assert_eq!(fj_scenario_set_plant_stiffness_scale(s, scale), FjStatus::Ok);
                let mut log: *mut FjLog = ptr::null_mut();
                assert_eq!(fj_scenario_run(s, &mut log), FjStatus::Ok);
                let mut m = FjMetrics {
                    max_err_deg: 0.0,
                    mean_err_deg: 0.0,
                    reversal_tau_e_p2p: 0.0,
                    max_tau_rate: 0.0,
                };
                fj_log_metrics(log, 0, &mut m);
                fj_log_free(log);
                fj_scenario_free(s);
                m.max_err_deg
            };
            assert!(run(0.5) > 3.0 * run(1.0));
        }
    }
}
