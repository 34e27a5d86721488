//! Gearbox elasticity laws: backlash, lost-motion and linear stiffness.
//!
//! Several variants of the same constitutive relation live here:
//!
//! * [`stiffness_piecewise`] / [`inverse_stiffness_piecewise`] — the
//!   three-branch textbook forms, branch by branch as published.
//! * [`stiffness_contact`] — a continuity-corrected three-branch law used as
//!   the plant ground truth. The published branch constants leave jumps at
//!   the band edges, which no physical gearbox exhibits; this variant anchors
//!   each branch at the band edge instead.
//! * [`stiffness_smooth`] — the C¹ tanh/exponential composite.
//! * [`stiffness_variable_order`] — the underlying repeated-pole ramp
//!   response of arbitrary order n (the smooth law's positive half is its
//!   n = 3 member).
//! * [`inverse_stiffness_smooth`] — the single-sigmoid smooth inverse used by
//!   the flatness controller, plus [`stiffness_smooth_implied`], its exact
//!   numerical inverse.

use crate::error::{Error, Result};
use crate::numeric::sigmoid;
use crate::params::StiffnessParams;

/// Piecewise elastic torque (N·m): zero in the backlash band, reduced slope
/// in the lost-motion band, full-contact slope with offset beyond.
pub fn stiffness_piecewise(dq: f64, p: &StiffnessParams) -> f64 {
    let sigma = if dq > 0.0 {
        1.0
    } else if dq < 0.0 {
        -1.0
    } else {
        0.0
    };
    let a = dq.abs();
    if a <= p.phi_b_star {
        0.0
    } else if a <= p.phi_b() {
        p.c_lm * (dq - 0.5 * p.phi_lm * sigma)
    } else {
        p.c_tr * dq + p.tau_e0() * sigma
    }
}

/// Continuity-corrected piecewise law used as the hard-backlash plant ground
/// truth: each branch is anchored at the preceding band edge, so the torque
/// is continuous in the torsion angle.
pub fn stiffness_contact(dq: f64, p: &StiffnessParams) -> f64 {
    let sigma = if dq > 0.0 {
        1.0
    } else if dq < 0.0 {
        -1.0
    } else {
        0.0
    };
    let a = dq.abs();
    if a <= p.phi_b_star {
        0.0
    } else if a <= p.phi_b() {
        p.c_lm * (dq - p.phi_b_star * sigma)
    } else {
        p.c_tr * (dq - p.phi_b() * sigma) + p.tau_e0() * sigma
    }
}

/// Positive half of the C¹ elastic torque law (the n = 3 ramp response),
/// valid for `dq >= 0`.
pub fn tau_e_plus(dq: f64, p: &StiffnessParams) -> f64 {
    let phi_b = p.phi_b();
    let c = p.c_tr;
    if phi_b == 0.0 {
        // Degenerate backlash-free case: plain linear spring.
        return c * dq;
    }
    let e = (-3.0 * dq / phi_b).exp();
    c * dq - c * phi_b
        + c * phi_b * e
        + 2.0 * c * dq * e
        + 1.5 * c / phi_b * dq * dq * e
}

/// C¹ smooth elastic torque law, odd in the torsion angle. The tanh factor
/// folds the argument onto the positive half, which keeps every exponential
/// argument non-positive.
pub fn stiffness_smooth(dq: f64, p: &StiffnessParams) -> f64 {
    let t = (p.s_e1 * dq).tanh();
    t * tau_e_plus(dq * t, p)
}

/// Ramp response of the order-n repeated-pole system evaluated at `dq >= 0`:
/// the solution of
/// `sum_{k=0..n} (phi_B/n)^k C(n,k) y^(k)(t) = c_TR t`, zero initial
/// conditions, at `t = dq`. Closed form:
/// `y = c_TR (t - n T + e^{-t/T} sum_{j=1..n} (n-j+1) T^{2-j} t^{j-1}/(j-1)!)`
/// with `T = phi_B / n`.
pub fn stiffness_variable_order(dq: f64, n: u32, p: &StiffnessParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("stiffness_variable_order: order must be >= 1"));
    }
    if !(dq >= 0.0) {
        return Err(Error::domain("stiffness_variable_order: torsion angle must be >= 0"));
    }
    let phi_b = p.phi_b();
    if phi_b == 0.0 {
        return Ok(p.c_tr * dq);
    }
    let t_c = phi_b / n as f64;
    let e = (-dq / t_c).exp();
    // sum_{j=1..n} (n-j+1) T^{2-j} dq^{j-1} / (j-1)!
    let mut sum = 0.0;
    let mut term = t_c; // j = 1: (n) * T * dq^0 / 0!  without the (n-j+1) factor
    for j in 1..=n {
        sum += (n - j + 1) as f64 * term;
        // advance T^{2-j} dq^{j-1} / (j-1)!  ->  j+1
        term *= dq / (t_c * j as f64);
    }
    Ok(p.c_tr * (dq - n as f64 * t_c + e * sum))
}

/// Piecewise inverse stiffness: torsion angle (rad) from elastic torque.
pub fn inverse_stiffness_piecewise(tau: f64, p: &StiffnessParams) -> f64 {
    let sigma = if tau > 0.0 {
        1.0
    } else if tau < 0.0 {
        -1.0
    } else {
        return 0.0;
    };
    let a = tau.abs();
    if a <= p.tau_e0() {
        tau / p.c_lm + 0.5 * p.phi_b_star * sigma
    } else {
        tau / p.c_tr + p.phi_b() * sigma
    }
}

/// Smooth inverse stiffness (rad):
/// `tau/c_TR + 2 phi_B sigma(s_E2 tau) - phi_B`. Odd, C∞, strictly
/// increasing.
pub fn inverse_stiffness_smooth(tau: f64, p: &StiffnessParams) -> f64 {
    tau / p.c_tr + 2.0 * p.phi_b() * sigmoid(p.s_e2 * tau) - p.phi_b()
}

/// Elastic torque implied by the smooth inverse law: solves
/// `inverse_stiffness_smooth(tau) = dq` for `tau` by safeguarded Newton.
/// This is the stiffness law under which the flatness controller's model
/// inversion is exact.
pub fn stiffness_smooth_implied(dq: f64, p: &StiffnessParams) -> f64 {
    let phi_b = p.phi_b();
    // Oddness: solve on the non-negative half only.
    if dq < 0.0 {
        return -stiffness_smooth_implied(-dq, p);
    }
    if dq == 0.0 {
        return 0.0;
    }
    // The sigmoid term is bounded by [0, phi_B], which brackets the root.
    let mut lo = p.c_tr * (dq - phi_b);
    let mut hi = p.c_tr * dq;
    let mut tau = p.c_tr * (dq - phi_b * 0.5);
    for _ in 0..200 {
        let s = sigmoid(p.s_e2 * tau);
        let g = tau / p.c_tr + 2.0 * phi_b * s - phi_b - dq;
        if g > 0.0 {
            hi = tau;
        } else {
            lo = tau;
        }
        let dg = 1.0 / p.c_tr + 2.0 * phi_b * p.s_e2 * s * (1.0 - s);
        let step = g / dg;
        let mut next = tau - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - tau).abs() <= 1e-14 * tau.abs().max(1.0) {
            return next;
        }
        tau = next;
    }
    tau
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn joint1() -> StiffnessParams {
        StiffnessParams {
            c_lm: 7.0e5,
            c_tr: 8.4225e6,
            phi_b_star: 1.5e-4,
            phi_lm: 1.5e-4,
            s_e1: 1.0e5,
            s_e2: 0.02,
        }
    }

    #[test]
    fn piecewise_branch_values() {
        let p = joint1();
        assert_eq!(stiffness_piecewise(1.0e-4, &p), 0.0);
        assert!((stiffness_piecewise(2.0e-4, &p) - 87.5).abs() < 1e-9);
        assert!((stiffness_piecewise(1.0e-3, &p) - 8527.5).abs() < 1e-9);
    }

    #[test]
    fn contact_law_is_continuous_at_band_edges() {
        let p = joint1();
        let eps = 1e-12;
        for edge in [p.phi_b_star, p.phi_b()] {
            let below = stiffness_contact(edge - eps, &p);
            let above = stiffness_contact(edge + eps, &p);
            assert!((above - below).abs() < 1e-3, "jump at {edge}: {below} vs {above}");
        }
        // Verbatim branch constants, for contrast, jump at phi_B by roughly
        // c_TR * phi_B.
        let jump = stiffness_piecewise(p.phi_b() + eps, &p) - stiffness_piecewise(p.phi_b(), &p);
        assert!(jump > 2000.0);
    }

    #[test]
    fn smooth_zero_and_flat_at_origin() {
        let p = joint1();
        assert_eq!(stiffness_smooth(0.0, &p), 0.0);
        let h = 1e-9;
        let slope = (stiffness_smooth(h, &p) - stiffness_smooth(-h, &p)) / (2.0 * h);
        assert!(slope.abs() < 1e-6 * p.c_tr, "slope at 0 = {slope}");
    }

    #[test]
    fn smooth_full_contact_slope() {
        let p = joint1();
        let dq = 10.0 * p.phi_b();
        let h = 1e-9;
        let slope = (stiffness_smooth(dq + h, &p) - stiffness_smooth(dq - h, &p)) / (2.0 * h);
        assert!((slope - p.c_tr).abs() < 1e-3 * p.c_tr, "slope = {slope}");
    }

    #[test]
    fn smooth_asymptote() {
        let p = joint1();
        let c_phi = p.c_tr * p.phi_b();
        for i in 0..=100 {
            let dq = p.phi_b() * (5.0 + 15.0 * i as f64 / 100.0);
            let asym = p.c_tr * dq - c_phi;
            assert!((stiffness_smooth(dq, &p) - asym).abs() <= c_phi * 1e-3);
        }
    }

    #[test]
    fn variable_order_zero_and_domain() {
        let p = joint1();
        assert_eq!(stiffness_variable_order(0.0, 3, &p).unwrap(), 0.0);
        assert!(stiffness_variable_order(1e-4, 0, &p).is_err());
        assert!(stiffness_variable_order(-1e-4, 3, &p).is_err());
    }

    #[test]
    fn variable_order_n3_equals_smooth_positive_half() {
        let p = joint1();
        for i in 0..=1000 {
            let dq = 10.0 * p.phi_b() * i as f64 / 1000.0;
            let a = stiffness_variable_order(dq, 3, &p).unwrap();
            let b = tau_e_plus(dq, &p);
            let scale = a.abs().max(p.c_tr * p.phi_b() * 1e-6);
            assert!((a - b).abs() <= 1e-9 * scale, "dq={dq}: {a} vs {b}");
        }
    }

    #[test]
    fn variable_order_n1_closed_form() {
        let p = joint1();
        let phi_b = p.phi_b();
        for i in 0..=1000 {
            let dq = 10.0 * phi_b * i as f64 / 1000.0;
            let a = stiffness_variable_order(dq, 1, &p).unwrap();
            let b = p.c_tr * (dq - phi_b + phi_b * (-dq / phi_b).exp());
            let scale = a.abs().max(p.c_tr * phi_b * 1e-6);
            assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn inverse_piecewise_values() {
        let p = joint1();
        assert_eq!(inverse_stiffness_piecewise(0.0, &p), 0.0);
        // Inside the lost-motion band: tau/c_LM + phi_B*/2.
        let dq = inverse_stiffness_piecewise(100.0, &p);
        assert!((dq - (100.0 / 7.0e5 + 7.5e-5)).abs() < 1e-15);
        // Beyond the band: tau/c_TR + phi_B.
        let dq = inverse_stiffness_piecewise(1000.0, &p);
        assert!((dq - (1000.0 / 8.4225e6 + 3.0e-4)).abs() < 1e-15);
    }

    /// The published third branches are algebraic inverses of each other up
    /// to the constant offset (phi_B + tau_E0/c_TR) carried by the forward
    /// law's branch constants; the relationship is exact.
    #[test]
    fn inverse_piecewise_third_branch_composition() {
        let p = joint1();
        let offset = p.phi_b() + p.tau_e0() / p.c_tr;
        for i in 1..=50 {
            let dq = p.phi_b() * (1.0 + i as f64);
            for sign in [1.0, -1.0] {
                let x = sign * dq;
                let back = inverse_stiffness_piecewise(stiffness_piecewise(x, &p), &p);
                assert!((back - (x + offset * sign)).abs() <= 1e-12 * dq.abs().max(1.0));
            }
        }
        // The contact law's third branch composes to within the lost-motion
        // offset tau_E0/c_TR only.
        for i in 1..=50 {
            let dq = p.phi_b() * (1.0 + i as f64);
            let back = inverse_stiffness_piecewise(stiffness_contact(dq, &p), &p);
            assert!((back - dq).abs() <= p.tau_e0() / p.c_tr + 1e-12);
        }
    }

    #[test]
    fn inverse_smooth_values() {
        let p = StiffnessParams { s_e2: 0.015, ..joint1() };
        assert_eq!(inverse_stiffness_smooth(0.0, &p), 0.0);
        // Sigmoid saturated at s_E2 * tau = 150.
        let dq = inverse_stiffness_smooth(1.0e4, &p);
        assert!((dq - (1.0e4 / 8.4225e6 + 3.0e-4)).abs() < 1e-7);
    }

    #[test]
    fn smooth_implied_round_trip() {
        let p = joint1();
        for i in -40..=40 {
            let dq = i as f64 * 1e-4;
            let tau = stiffness_smooth_implied(dq, &p);
            let back = inverse_stiffness_smooth(tau, &p);
            assert!((back - dq).abs() < 1e-12 * dq.abs().max(1e-6), "dq={dq}");
        }
    }

    /// Consistency of the smooth inverse with the hard contact law. The
    /// lost-motion branch offset tau_E0 is a fixed model disagreement, so the
    /// 2 % band holds once |tau| dominates it (55x leaves margin over the
    /// exact 50x break-even point).
    #[test]
    fn inverse_consistency_with_contact_law() {
        let p = joint1();
        let lo = 55.0 * p.tau_e0();
        for i in 0..=100 {
            let tau = lo + (100.0 * p.tau_e0() - lo) * i as f64 / 100.0;
            for sign in [1.0, -1.0] {
                let t = sign * tau;
                let err = (stiffness_contact(inverse_stiffness_smooth(t, &p), &p) - t).abs();
                assert!(err <= 0.02 * tau, "tau={t}: err={err}");
            }
        }
    }

    proptest! {
        #[test]
        fn odd_symmetry(dq in -5e-3f64..5e-3) {
            let p = joint1();
            prop_assert!((stiffness_smooth(dq, &p) + stiffness_smooth(-dq, &p)).abs() < 1e-9);
            prop_assert_eq!(stiffness_piecewise(dq, &p), -stiffness_piecewise(-dq, &p));
            prop_assert_eq!(stiffness_contact(dq, &p), -stiffness_contact(-dq, &p));
        }

        #[test]
        fn inverse_odd_symmetry(tau in -5e4f64..5e4) {
            let p = joint1();
            let a = inverse_stiffness_smooth(tau, &p);
            let b = inverse_stiffness_smooth(-tau, &p);
            prop_assert!((a + b).abs() < 1e-15);
            prop_assert_eq!(
                inverse_stiffness_piecewise(tau, &p),
                -inverse_stiffness_piecewise(-tau, &p)
            );
        }

        #[test]
        fn finite_for_finite_input(dq in -1e3f64..1e3) {
            let p = joint1();
            prop_assert!(stiffness_smooth(dq, &p).is_finite());
            prop_assert!(stiffness_piecewise(dq, &p).is_finite());
        }
    }
}
