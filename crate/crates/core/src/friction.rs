//! Gearbox friction laws: the piecewise Coulomb + viscous model and its
//! continuously differentiable sigmoid approximation, including the analytic
//! time derivatives the flatness controller needs.

use crate::error::{Error, Result};
use crate::numeric::{sigmoid, sigmoid_d1, sigmoid_d2};
use crate::params::FrictionParams;

/// Piecewise Coulomb + viscous friction torque (N·m) at link velocity `v`.
/// Exactly zero at standstill; no stiction model.
pub fn friction_piecewise(v: f64, p: &FrictionParams) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::domain("friction_piecewise: non-finite velocity"));
    }
    if v == 0.0 {
        Ok(0.0)
    } else {
        Ok(p.viscous * v + p.coulomb * v.signum())
    }
}

/// Smooth friction torque (N·m): `f_v v + 2 f_c sigma(s_F v) - f_c`.
pub fn friction_smooth(v: f64, p: &FrictionParams) -> f64 {
    p.viscous * v + 2.0 * p.coulomb * sigmoid(p.smoothness * v) - p.coulomb
}

/// First and second time derivatives of [`friction_smooth`] along a
/// trajectory with velocity `v`, acceleration `a` and jerk `j`.
pub fn friction_smooth_derivs(v: f64, a: f64, j: f64, p: &FrictionParams) -> (f64, f64) {
    let s = sigmoid(p.smoothness * v);
    let two_fc_sf = 2.0 * p.coulomb * p.smoothness;
    let d1 = p.viscous * a + two_fc_sf * sigmoid_d1(s) * a;
    let d2 = p.viscous * j + two_fc_sf * (sigmoid_d2(s) * p.smoothness * a * a + sigmoid_d1(s) * j);
    (d1, d2)
}
