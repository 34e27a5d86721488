//! Named self-checks over a parameter set, runnable from the CLI.
//!
//! Each check has a stable identifier, verifies one model invariant with an
//! explicit tolerance, and reports the measured figure so failures are
//! diagnosable from the CLI output alone.

use crate::error::Result;
use crate::friction::{friction_piecewise, friction_smooth};
use crate::harness::{
    compute_metrics, run_scenario, FeedbackKind, FeedforwardKind, ScenarioConfig,
};
use crate::params::JointParams;
use crate::plant::PlantLaw;
use crate::stiffness::{
    inverse_stiffness_smooth, stiffness_smooth, stiffness_smooth_implied,
    stiffness_variable_order, tau_e_plus,
};
use crate::trajectory::preset;

/// Outcome of one named invariant check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: &'static str,
    pub passed: bool,
    /// Measured figure vs. tolerance, human readable.
    pub detail: String,
}

impl CheckResult {
    fn from_measure(id: &'static str, measured: f64, tol: f64) -> Self {
        Self {
            id,
            passed: measured <= tol,
            detail: format!("measured {measured:.3e}, tolerance {tol:.3e}"),
        }
    }
}

fn check_params(joints: &[JointParams]) -> CheckResult {
    for (i, j) in joints.iter().enumerate() {
        if let Err(e) = j.validate() {
            return CheckResult {
                id: "params-admissible",
                passed: false,
                detail: format!("joint {i}: {e}"),
            };
        }
    }
    CheckResult { id: "params-admissible", passed: true, detail: format!("{} joints", joints.len()) }
}

fn check_friction_symmetry(joints: &[JointParams]) -> CheckResult {
    let mut worst = 0.0f64;
    for j in joints {
        for k in -50..=50 {
            let v = k as f64 * 0.04;
            worst = worst.max((friction_smooth(v, &j.friction) + friction_smooth(-v, &j.friction)).abs());
            let a = friction_piecewise(v, &j.friction).unwrap();
            let b = friction_piecewise(-v, &j.friction).unwrap();
            worst = worst.max((a + b).abs());
        }
    }
    CheckResult::from_measure("friction-odd-symmetry", worst, 1e-9)
}

fn check_stiffness_symmetry(joints: &[JointParams]) -> CheckResult {
    let mut worst = 0.0f64;
    for j in joints {
        let s = &j.stiffness;
        for k in -50..=50 {
            let dq = k as f64 * 0.2 * s.phi_b().max(1e-6);
            let scale = s.c_tr * dq.abs().max(1e-12);
            worst = worst
                .max((stiffness_smooth(dq, s) + stiffness_smooth(-dq, s)).abs() / scale);
        }
    }
    CheckResult::from_measure("stiffness-odd-symmetry", worst, 1e-9)
}

fn check_stiffness_asymptote(joints: &[JointParams]) -> CheckResult {
    let mut worst = 0.0f64;
    for j in joints {
        let s = &j.stiffness;
        let phi_b = s.phi_b();
        if phi_b == 0.0 {
            continue;
        }
        let c_phi = s.c_tr * phi_b;
        for i in 0..=60 {
            let dq = phi_b * (5.0 + 15.0 * i as f64 / 60.0);
            let gap = (stiffness_smooth(dq, s) - (s.c_tr * dq - c_phi)).abs();
            worst = worst.max(gap / c_phi);
        }
    }
    CheckResult::from_measure("stiffness-smooth-asymptote", worst, 1e-3)
}

fn check_variable_order(joints: &[JointParams]) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for j in joints {
        let s = &j.stiffness;
        for i in 0..=200 {
            let dq = 10.0 * s.phi_b().max(1e-6) * i as f64 / 200.0;
            let a = stiffness_variable_order(dq, 3, s)?;
            let b = tau_e_plus(dq, s);
            worst = worst.max((a - b).abs() / a.abs().max(s.c_tr * 1e-10));
        }
    }
    Ok(CheckResult::from_measure("variable-order-n3-matches-smooth", worst, 1e-9))
}

fn check_inverse_round_trip(joints: &[JointParams]) -> CheckResult {
    let mut worst = 0.0f64;
    for j in joints {
        let s = &j.stiffness;
        for k in -40..=40 {
            let dq = k as f64 * 0.1 * s.phi_b().max(1e-6);
            let back = inverse_stiffness_smooth(stiffness_smooth_implied(dq, s), s);
            worst = worst.max((back - dq).abs() / dq.abs().max(1e-9));
        }
    }
    CheckResult::from_measure("inverse-round-trip", worst, 1e-11)
}

/// Closed-loop flatness consistency: on the matching smooth plant the link
/// tracking error stays tiny. `c_tr_scale` perturbs the plant's stiffness
/// away from the controller model (1.0 = matched), which must break the
/// check — that sensitivity is itself asserted in the tests.
pub fn flatness_consistency(joints: &[JointParams], c_tr_scale: f64) -> Result<CheckResult> {
    let mut cfg = ScenarioConfig::new(joints.to_vec());
    cfg.law = PlantLaw::Smooth;
    cfg.duration = 2.5;
    cfg.dt_plant = 5e-5;
    cfg.dt_ctrl = 2e-4;
    cfg.feedforward = FeedforwardKind::Flatness;
    cfg.feedback = FeedbackKind::None;
    if (c_tr_scale - 1.0).abs() > 0.0 {
        let mut pp = joints.to_vec();
        for j in &mut pp {
            j.stiffness.c_tr *= c_tr_scale;
        }
        cfg.plant_params = Some(pp);
    }
    let amp = 0.4;
    let source = preset("demanding", amp).expect("preset exists");
    // The presets are single-joint; replicate config onto joint 1 only.
    let cfg = if joints.len() == 1 {
        cfg
    } else {
        let mut c = ScenarioConfig::new(vec![joints[0]]);
        c.law = cfg.law;
        c.duration = cfg.duration;
        c.dt_plant = cfg.dt_plant;
        c.dt_ctrl = cfg.dt_ctrl;
        c.plant_params = cfg.plant_params.map(|pp| vec![pp[0]]);
        c
    };
    let log = run_scenario(&cfg, source.as_ref())?;
    let m = compute_metrics(&log, cfg.dt_ctrl)?;
    Ok(CheckResult::from_measure("flatness-consistency", m[0].max_err_deg, 2e-3))
}

/// Runs every check against a parameter set.
pub fn run_checks(joints: &[JointParams]) -> Result<Vec<CheckResult>> {
    let mut out = vec![check_params(joints)];
    if !out[0].passed {
        return Ok(out); // remaining checks assume admissible parameters
    }
    out.push(check_friction_symmetry(joints));
    out.push(check_stiffness_symmetry(joints));
    out.push(check_stiffness_asymptote(joints));
    out.push(check_variable_order(joints)?);
    out.push(check_inverse_round_trip(joints));
    out.push(flatness_consistency(joints, 1.0)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::named_set;

    #[test]
    fn all_checks_pass_for_default_set() {
        let joints = named_set("kr300-joint1").unwrap();
        for c in run_checks(&joints).unwrap() {
            assert!(c.passed, "{}: {}", c.id, c.detail);
        }
    }

    #[test]
    fn checks_pass_for_multi_joint_set() {
        let joints = named_set("kr300-all").unwrap();
        for c in run_checks(&joints).unwrap() {
            assert!(c.passed, "{}: {}", c.id, c.detail);
        }
    }

    /// The consistency check must be sensitive: a stiffness mismatch between
    /// plant and controller model has to trip it.
    #[test]
    fn flatness_consistency_detects_model_mismatch() {
        let joints = named_set("kr300-joint1").unwrap();
        let r = flatness_consistency(&joints, 0.5).unwrap();
        assert!(!r.passed, "expected failure, got {}", r.detail);
    }

    #[test]
    fn bad_params_short_circuit() {
        let mut joints = named_set("kr300-joint1").unwrap();
        joints[0].motor_inertia = -1.0;
        let out = run_checks(&joints).unwrap();
        assert_eq!(out.len(), 1);
        assert!(!out[0].passed);
    }
}
