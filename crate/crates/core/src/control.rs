//! Feedforward and feedback torque computation.
//!
//! The flatness-based feedforward inverts the joint model along the C⁴
//! reference: from the desired link motion it reconstructs the required
//! elastic torque, the torsion angle through the smooth inverse stiffness,
//! and from there the motor trajectory and torque — no integration, purely
//! algebraic. The rigid feedforward collapses the joint to a single inertia
//! and serves as the baseline. Feedback is a cascaded P position / P speed
//! loop on the motor; an output shaper (magnitude clamp, rate clamp,
//! first-order low-pass) conditions the commanded torque.

use crate::error::{Error, Result};
use crate::friction::{friction_smooth, friction_smooth_derivs};
use crate::numeric::{sigmoid, sigmoid_d1, sigmoid_d2};
use crate::params::JointParams;

/// Motor-side reference produced by the feedforward for one joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorReference {
    /// Feedforward motor torque (N·m, motor side).
    pub tau_ff: f64,
    /// Motor angle reference (rad, motor side).
    pub theta_r: f64,
    /// Motor speed reference (rad/s, motor side).
    pub theta_dot_r: f64,
    /// Motor acceleration reference (rad/s², motor side).
    pub theta_ddot_r: f64,
}

/// Link-side load torque and its first two time derivatives along the
/// reference: `L = M qdd + g0 sin(q) + tau_F_smooth(qd)` for the
/// constant-inertia, sin-gravity load model.
fn load_chain(
    pos: f64,
    vel: f64,
    acc: f64,
    jerk: f64,
    snap: f64,
    link_inertia: f64,
    gravity_amp: f64,
    p: &JointParams,
) -> (f64, f64, f64) {
    let tau_f = friction_smooth(vel, &p.friction);
    let (tau_f_d1, tau_f_d2) = friction_smooth_derivs(vel, acc, jerk, &p.friction);
    let l = link_inertia * acc + gravity_amp * pos.sin() + tau_f;
    let l_d1 = link_inertia * jerk + gravity_amp * pos.cos() * vel + tau_f_d1;
    let l_d2 = link_inertia * snap
        + gravity_amp * (pos.cos() * acc - pos.sin() * vel * vel)
        + tau_f_d2;
    (l, l_d1, l_d2)
}

/// Flatness-based feedforward for one joint: motor trajectory and torque
/// that realize the given link reference exactly on the smooth joint model.
#[allow(clippy::too_many_arguments)]
pub fn flatness_ff(
    pos: f64,
    vel: f64,
    acc: f64,
    jerk: f64,
    snap: f64,
    link_inertia: f64,
    gravity_amp: f64,
    p: &JointParams,
) -> Result<MotorReference> {
    let (l, l_d1, l_d2) = load_chain(pos, vel, acc, jerk, snap, link_inertia, gravity_amp, p);

    let s = &p.stiffness;
    let phi_b = s.phi_b();
    let sig = sigmoid(s.s_e2 * l);
    let two_phi_se2 = 2.0 * phi_b * s.s_e2;
    let dq = l / s.c_tr + 2.0 * phi_b * sig - phi_b;
    let dq_d1 = l_d1 / s.c_tr + two_phi_se2 * sigmoid_d1(sig) * l_d1;
    let dq_d2 = l_d2 / s.c_tr
        + two_phi_se2 * (sigmoid_d2(sig) * s.s_e2 * l_d1 * l_d1 + sigmoid_d1(sig) * l_d2);

    let u = p.gear_ratio;
    let out = MotorReference {
        theta_r: u * (pos + dq),
        theta_dot_r: u * (vel + dq_d1),
        theta_ddot_r: u * (acc + dq_d2),
        tau_ff: p.motor_inertia * u * (acc + dq_d2) + l / u,
    };
    if !(out.tau_ff.is_finite()
        && out.theta_r.is_finite()
        && out.theta_dot_r.is_finite()
        && out.theta_ddot_r.is_finite())
    {
        return Err(Error::Controller {
            joint: 0,
            detail: "flatness feedforward produced a non-finite value".into(),
        });
    }
    Ok(out)
}

/// Rigid-model feedforward: the joint treated as a single lumped inertia
/// `M + J u²` with the same smooth friction and gravity terms.
pub fn rigid_ff(
    pos: f64,
    vel: f64,
    acc: f64,
    link_inertia: f64,
    gravity_amp: f64,
    p: &JointParams,
) -> f64 {
    let u = p.gear_ratio;
    ((link_inertia + p.motor_inertia * u * u) * acc
        + gravity_amp * pos.sin()
        + friction_smooth(vel, &p.friction))
        / u
}

/// Cascaded P/P feedback torque:
/// `tau_C = K_V (K_P (q_R - q) + theta_dot_ref - theta_dot)`.
pub fn feedback(q_err: f64, theta_dot_ref: f64, theta_dot_meas: f64, p: &JointParams) -> f64 {
    p.k_v * (p.k_p * q_err + theta_dot_ref - theta_dot_meas)
}

/// Stateful output conditioning for one joint's commanded torque, applied
/// in order: magnitude clamp, rate clamp, first-order low-pass.
#[derive(Debug, Clone)]
pub struct TorqueShaper {
    tau_lim: f64,
    max_delta: f64,
    lp_alpha: f64,
    prev_rate: f64,
    lp_state: f64,
    primed: bool,
}

impl TorqueShaper {
    pub fn new(p: &JointParams, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::domain("torque shaper: dt must be > 0"));
        }
        Ok(Self {
            tau_lim: p.tau_lim,
            max_delta: p.tau_rate_lim * dt,
            lp_alpha: if p.lp_time_constant > 0.0 {
                dt / (p.lp_time_constant + dt)
            } else {
                1.0
            },
            prev_rate: 0.0,
            lp_state: 0.0,
            primed: false,
        })
    }

    pub fn apply(&mut self, raw: f64) -> f64 {
        let clamped = raw.clamp(-self.tau_lim, self.tau_lim);
        let rate_limited = if self.primed {
            clamped.clamp(self.prev_rate - self.max_delta, self.prev_rate + self.max_delta)
        } else {
            // First sample: rate-limit from zero command.
            clamped.clamp(-self.max_delta, self.max_delta)
        };
        self.prev_rate = rate_limited;
        self.lp_state += self.lp_alpha * (rate_limited - self.lp_state);
        self.primed = true;
        self.lp_state
    }

    pub fn reset(&mut self) {
        self.prev_rate = 0.0;
        self.lp_state = 0.0;
        self.primed = false;
    }
}

/// Rounds a measurement to the nearest multiple of `resolution`;
/// non-positive resolution passes the value through.
pub fn sensor_quantize(value: f64, resolution: f64) -> f64 {
    if resolution > 0.0 {
        (value / resolution).round() * resolution
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::named_set;
    use proptest::prelude::*;

    fn joint1() -> JointParams {
        named_set("kr300-joint1").unwrap()[0]
    }

    #[test]
    fn holding_against_gravity() {
        // At rest the feedforward reduces to the static gravity torque
        // divided by the gear ratio.
        let p = joint1();
        let g0 = 700.0;
        let q0 = 0.3;
        let r = flatness_ff(q0, 0.0, 0.0, 0.0, 0.0, p.link_inertia, g0, &p).unwrap();
        assert!((r.tau_ff - g0 * q0.sin() / p.gear_ratio).abs() < 1e-12);
        assert_eq!(r.theta_dot_r, 0.0);
        // The motor leads the link by the gravity wind-up.
        assert!(r.theta_r > p.gear_ratio * q0);

        let rigid = rigid_ff(q0, 0.0, 0.0, p.link_inertia, g0, &p);
        assert!((rigid - g0 * q0.sin() / p.gear_ratio).abs() < 1e-12);
    }

    #[test]
    fn flatness_inverts_the_smooth_stiffness() {
        // The torsion implied by theta_r must map back to the load torque
        // through the smooth inverse stiffness.
        use crate::stiffness::stiffness_smooth_implied;
        let p = joint1();
        let (pos, vel, acc) = (0.1, 0.8, 2.0);
        let r = flatness_ff(pos, vel, acc, 1.0, 0.5, p.link_inertia, 0.0, &p).unwrap();
        let dq = r.theta_r / p.gear_ratio - pos;
        let l = p.link_inertia * acc + friction_smooth(vel, &p.friction);
        assert!((stiffness_smooth_implied(dq, &p.stiffness) - l).abs() < 1e-9 * l.abs());
    }

    /// The motor speed/acceleration references must be the time derivatives
    /// of the motor angle reference along a synthetic C⁴ path.
    #[test]
    fn motor_reference_chain_is_consistent() {
        let p = joint1();
        let m = p.link_inertia;
        let path = |t: f64| {
            let (s, c) = (1.3 * t).sin_cos();
            [0.2 * s, 0.26 * c, -0.338 * s, -0.4394 * c, 0.57122 * s]
        };
        let h = 1e-6;
        for i in 0..25 {
            let t = 0.05 + 0.1 * i as f64;
            let at = |t: f64| {
                let q = path(t);
                flatness_ff(q[0], q[1], q[2], q[3], q[4], m, 0.0, &p).unwrap()
            };
            let (lo, mid, hi) = (at(t - h), at(t), at(t + h));
            let fd_speed = (hi.theta_r - lo.theta_r) / (2.0 * h);
            let fd_acc = (hi.theta_dot_r - lo.theta_dot_r) / (2.0 * h);
            assert!((fd_speed - mid.theta_dot_r).abs() < 1e-5 * mid.theta_dot_r.abs().max(1.0));
            assert!((fd_acc - mid.theta_ddot_r).abs() < 1e-4 * mid.theta_ddot_r.abs().max(1.0));
        }
    }

    /// With the dead zone removed and the spring made very stiff, the
    /// flatness feedforward must collapse to the rigid one.
    #[test]
    fn degenerate_stiffness_reduces_to_rigid() {
        let mut p = joint1();
        p.stiffness.phi_b_star = 0.0;
        p.stiffness.phi_lm = 0.0;
        p.stiffness.c_lm = 1e12;
        p.stiffness.c_tr = 1e12;
        let g0 = 700.0;
        let mut max_ff = 0.0f64;
        let mut max_gap = 0.0f64;
        for i in 0..60 {
            let t = 0.05 * i as f64;
            let (s, c) = (1.7 * t).sin_cos();
            let (pos, vel, acc) = (0.4 * s, 0.68 * c, -1.156 * s);
            let (jerk, snap) = (-1.9652 * c, 3.34084 * s);
            let flat = flatness_ff(pos, vel, acc, jerk, snap, p.link_inertia, g0, &p).unwrap();
            let rigid = rigid_ff(pos, vel, acc, p.link_inertia, g0, &p);
            max_ff = max_ff.max(flat.tau_ff.abs());
            max_gap = max_gap.max((flat.tau_ff - rigid).abs());
        }
        assert!(max_gap <= 1e-6 * max_ff, "gap {max_gap} vs scale {max_ff}");
    }

    proptest! {
        /// Feedback is linear in the position error: scaling the error by
        /// lambda scales the position-loop contribution by exactly lambda.
        #[test]
        fn feedback_equivariant_in_position_error(
            q_err in -0.5f64..0.5,
            lambda in -4.0f64..4.0,
        ) {
            let p = joint1();
            let base = feedback(q_err, 0.0, 0.0, &p);
            let scaled = feedback(lambda * q_err, 0.0, 0.0, &p);
            prop_assert!((scaled - lambda * base).abs() < 1e-12 * base.abs().max(1.0));
        }
    }

    #[test]
    fn feedback_pinned_value() {
        // q error 0.01 rad, K_P = 20, K_V = 0.015, speeds matched.
        let p = joint1();
        assert!((feedback(0.01, 0.0, 0.0, &p) - 0.003).abs() < 1e-15);
    }

    #[test]
    fn shaper_pinned_behavior() {
        let p = joint1(); // tau_lim 20, rate 200
        let dt = 8e-4;
        let mut sh = TorqueShaper::new(&p, dt).unwrap();
        // Step to 100: magnitude clamp to 20, then rate clamp to 200 * dt.
        assert!((sh.apply(100.0) - 0.16).abs() < 1e-12);
        assert!((sh.apply(100.0) - 0.32).abs() < 1e-12);
        // Eventually saturates at the magnitude limit.
        for _ in 0..1000 {
            sh.apply(100.0);
        }
        assert!((sh.apply(100.0) - 20.0).abs() < 1e-12);
        // Constant zero passes through untouched.
        sh.reset();
        for _ in 0..5 {
            assert_eq!(sh.apply(0.0), 0.0);
        }
    }

    #[test]
    fn shaper_low_pass() {
        let mut p = joint1();
        p.lp_time_constant = 0.01;
        p.tau_rate_lim = 1e9; // isolate the filter
        let dt = 8e-4;
        let mut sh = TorqueShaper::new(&p, dt).unwrap();
        let y1 = sh.apply(10.0);
        assert!((y1 - 10.0 * dt / (0.01 + dt)).abs() < 1e-12);
        let mut y = y1;
        for _ in 0..500 {
            y = sh.apply(10.0);
        }
        assert!((y - 10.0).abs() < 1e-6);
    }

    #[test]
    fn quantization() {
        assert_eq!(sensor_quantize(0.12349, 1e-3), 0.123);
        assert_eq!(sensor_quantize(-0.0016, 1e-3), -0.002);
        assert_eq!(sensor_quantize(0.12349, 0.0), 0.12349);
    }

    proptest! {
        /// Shaper output always honors both limits.
        #[test]
        fn shaper_respects_limits(inputs in proptest::collection::vec(-100.0f64..100.0, 1..60)) {
            let p = joint1();
            let dt = 8e-4;
            let mut sh = TorqueShaper::new(&p, dt).unwrap();
            let mut prev = 0.0;
            for x in inputs {
                let y = sh.apply(x);
                prop_assert!(y.abs() <= p.tau_lim + 1e-12);
                prop_assert!((y - prev).abs() <= p.tau_rate_lim * dt + 1e-12);
                prev = y;
            }
        }

        #[test]
        fn feedforward_finite_on_reasonable_inputs(
            pos in -3.0f64..3.0,
            vel in -3.0f64..3.0,
            acc in -20.0f64..20.0,
        ) {
            let p = joint1();
            let r = flatness_ff(pos, vel, acc, 0.0, 0.0, p.link_inertia, 500.0, &p).unwrap();
            prop_assert!(r.tau_ff.is_finite());
        }
    }
}
