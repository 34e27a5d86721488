//! Per-joint physical and controller parameter records.
//!
//! The named default sets mirror the data sheets of a KUKA Quantec KR300
//! Ultra SE class servo axis. `kr300-joint1` / `kr300-all` carry the newer
//! multi-joint identification, `legacy-v1` the older single-axis one. The
//! two identifications disagree on several values (stiffness, friction,
//! velocity gain); both are shipped, with `kr300-joint1` as the canonical
//! default.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coulomb + viscous friction constants for one gearbox.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrictionParams {
    /// Viscous coefficient f_v (N·m·s/rad).
    pub viscous: f64,
    /// Coulomb torque f_c (N·m).
    pub coulomb: f64,
    /// Smoothness factor s_F of the sigmoid approximation (s/rad).
    pub smoothness: f64,
}

impl FrictionParams {
    pub fn new(viscous: f64, coulomb: f64, smoothness: f64) -> Result<Self> {
        let p = Self { viscous, coulomb, smoothness };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.viscous >= 0.0) {
            return Err(Error::domain("friction: f_v must be >= 0"));
        }
        if !(self.coulomb >= 0.0) {
            return Err(Error::domain("friction: f_c must be >= 0"));
        }
        if !(self.smoothness > 0.0) {
            return Err(Error::domain("friction: s_F must be > 0"));
        }
        Ok(())
    }
}

/// Backlash / lost-motion / linear-elasticity constants for one gearbox.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessParams {
    /// Lost-motion stiffness c_LM (N·m/rad).
    pub c_lm: f64,
    /// Torsional-rigidity (full contact) stiffness c_TR (N·m/rad).
    pub c_tr: f64,
    /// Backlash half-angle phi_B* (rad).
    pub phi_b_star: f64,
    /// Lost-motion angle phi_LM (rad).
    pub phi_lm: f64,
    /// Tanh slope factor s_E1 (1/rad). Must satisfy s_E1 >= 30/phi_B.
    pub s_e1: f64,
    /// Elastic smoothing factor s_E2 (1/(N·m)).
    pub s_e2: f64,
}

impl StiffnessParams {
    pub fn new(
        c_lm: f64,
        c_tr: f64,
        phi_b_star: f64,
        phi_lm: f64,
        s_e1: f64,
        s_e2: f64,
    ) -> Result<Self> {
        let p = Self { c_lm, c_tr, phi_b_star, phi_lm, s_e1, s_e2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        // Equality is admitted for the degenerate single-slope (linear
        // spring) configuration.
        if !(self.c_lm > 0.0 && self.c_tr >= self.c_lm) {
            return Err(Error::domain("stiffness: requires c_TR >= c_LM > 0"));
        }
        if !(self.phi_b_star >= 0.0) {
            return Err(Error::domain("stiffness: phi_B* must be >= 0"));
        }
        if !(self.phi_lm >= 0.0) {
            return Err(Error::domain("stiffness: phi_LM must be >= 0"));
        }
        if !(self.s_e2 > 0.0) {
            return Err(Error::domain("stiffness: s_E2 must be > 0"));
        }
        let phi_b = self.phi_b();
        if phi_b > 0.0 && !(self.s_e1 >= 30.0 / phi_b) {
            return Err(Error::domain("stiffness: s_E1 must be >= 30/phi_B"));
        }
        Ok(())
    }

    /// Effective backlash angle phi_B = phi_B* + phi_LM (rad).
    #[inline]
    pub fn phi_b(&self) -> f64 {
        self.phi_b_star + self.phi_lm
    }

    /// Elastic torque offset tau_E0 = c_LM * phi_LM (N·m).
    #[inline]
    pub fn tau_e0(&self) -> f64 {
        self.c_lm * self.phi_lm
    }
}

/// All physical and controller constants of a single flexible joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointParams {
    /// Motor inertia J (kg·m²), motor side.
    pub motor_inertia: f64,
    /// Gear ratio u (link angle = motor angle / u).
    pub gear_ratio: f64,
    /// Link inertia M (kg·m²), used by the constant rigid-body provider.
    pub link_inertia: f64,
    pub friction: FrictionParams,
    pub stiffness: StiffnessParams,
    /// Proportional position gain K_P (1/s).
    pub k_p: f64,
    /// Proportional speed gain K_V (N·m·s/rad).
    pub k_v: f64,
    /// Feedforward torque magnitude limit (N·m, motor side).
    pub tau_lim: f64,
    /// Feedforward torque rate limit (N·m/s).
    pub tau_rate_lim: f64,
    /// First-order low-pass time constant for the feedforward torque (s).
    /// Zero disables the filter.
    pub lp_time_constant: f64,
}

impl JointParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.motor_inertia > 0.0) {
            return Err(Error::domain("joint: J must be > 0"));
        }
        if !(self.gear_ratio > 0.0) {
            return Err(Error::domain("joint: u must be > 0"));
        }
        if !(self.link_inertia > 0.0) {
            return Err(Error::domain("joint: M must be > 0"));
        }
        if !(self.k_p >= 0.0 && self.k_v >= 0.0) {
            return Err(Error::domain("joint: K_P and K_V must be >= 0"));
        }
        if !(self.tau_lim > 0.0) {
            return Err(Error::domain("joint: tau_lim must be > 0"));
        }
        if !(self.tau_rate_lim > 0.0) {
            return Err(Error::domain("joint: tau_rate_lim must be > 0"));
        }
        if !(self.lp_time_constant >= 0.0) {
            return Err(Error::domain("joint: lp_time_constant must be >= 0"));
        }
        self.friction.validate()?;
        self.stiffness.validate()
    }
}

/// Multi-joint identification rows (gear ratios kept as exact rationals).
/// Columns: f_c, f_v, s_F, K_V, K_P, phi_B* (rad), phi_LM (rad), c_TR,
/// s_E2, u numerator, u denominator, J.
const KR300_ROWS: [[f64; 12]; 6] = [
    [200.0, 800.0, 500.0, 0.015, 20.0, 1.5e-4, 1.5e-4, 8.4225e6, 0.02, 1798.0, 7.0, 0.0138],
    [150.0, 500.0, 300.0, 0.015, 20.0, 1.5e-4, 1.5e-4, 8.9381e6, 0.015, 1872.0, 7.0, 0.0177],
    [180.0, 600.0, 100.0, 0.015, 20.0, 1.5e-4, 1.5e-4, 5.5691e6, 0.015, 757.0, 3.0, 0.0177],
    [150.0, 100.0, 200.0, 0.015, 20.0, 1.5e-4, 1.5e-4, 1.6845e6, 0.015, 221.0, 1.0, 0.0150],
    [150.0, 100.0, 200.0, 0.015, 20.0, 1.5e-4, 1.5e-4, 1.6845e6, 0.015, 5032.0, 21.0, 0.0150],
    [150.0, 100.0, 200.0, 0.015, 20.0, 1.5e-4, 1.5e-4, 1.0726e6, 0.015, 206793.0, 1340.0, 0.0150],
];

/// Link inertia of axis 1 from the single-axis identification. The
/// multi-joint table does not list link inertias, so the constant-parameter
/// provider reuses this value for every joint of `kr300-all`.
const KR300_LINK_INERTIA: f64 = 924.0;

/// Offset torque of axis 1 from the single-axis identification; fixes the
/// lost-motion stiffness via c_LM = tau_E0 / phi_LM.
const KR300_TAU_E0: f64 = 105.0;

fn kr300_joint(idx: usize) -> JointParams {
    let r = &KR300_ROWS[idx];
    let phi_b = r[5] + r[6];
    JointParams {
        motor_inertia: r[11],
        gear_ratio: r[9] / r[10],
        link_inertia: KR300_LINK_INERTIA,
        friction: FrictionParams { viscous: r[1], coulomb: r[0], smoothness: r[2] },
        stiffness: StiffnessParams {
            c_lm: KR300_TAU_E0 / r[6],
            c_tr: r[7],
            phi_b_star: r[5],
            phi_lm: r[6],
            s_e1: 30.0 / phi_b,
            s_e2: r[8],
        },
        k_p: r[4],
        k_v: r[3],
        tau_lim: 20.0,
        tau_rate_lim: 200.0,
        lp_time_constant: 0.0,
    }
}

fn legacy_v1_joint() -> JointParams {
    JointParams {
        motor_inertia: 0.012,
        gear_ratio: 256.86,
        link_inertia: 924.0,
        friction: FrictionParams { viscous: 8590.0, coulomb: 500.0, smoothness: 10.0 },
        stiffness: StiffnessParams {
            c_lm: 641.0,
            c_tr: 2565.0,
            phi_b_star: 0.15e-3,
            phi_lm: 0.29e-3,
            // Computed from the same sum the validator uses, so the bound
            // holds exactly in floating point.
            s_e1: 30.0 / (0.15e-3 + 0.29e-3),
            s_e2: 2.86,
        },
        k_p: 0.0779,
        k_v: 12.9,
        tau_lim: 20.0,
        tau_rate_lim: 200.0,
        lp_time_constant: 0.0,
    }
}

/// Returns the named parameter set, or `None` for an unknown name.
pub fn named_set(name: &str) -> Option<Vec<JointParams>> {
    match name {
        "kr300-joint1" => Some(vec![kr300_joint(0)]),
        "kr300-all" => Some((0..6).map(kr300_joint).collect()),
        "legacy-v1" => Some(vec![legacy_v1_joint()]),
        _ => None,
    }
}

/// Names of all shipped parameter sets.
pub fn set_names() -> &'static [&'static str] {
    &["kr300-joint1", "kr300-all", "legacy-v1"]
}

/// Renders a parameter set as an aligned table with units, one column per
/// joint.
pub fn format_set(name: &str) -> Option<String> {
    let joints = named_set(name)?;
    let mut rows: Vec<(String, String, Vec<String>)> = Vec::new();
    let mut push = |desc: &str, unit: &str, f: &dyn Fn(&JointParams) -> f64| {
        rows.push((
            desc.to_string(),
            unit.to_string(),
            joints.iter().map(|j| format!("{}", f(j))).collect(),
        ));
    };
    push("motor inertia J", "kg m^2", &|j| j.motor_inertia);
    push("link inertia M", "kg m^2", &|j| j.link_inertia);
    push("gearbox ratio u", "-", &|j| j.gear_ratio);
    push("backlash angle phi_B*", "rad", &|j| j.stiffness.phi_b_star);
    push("lost-motion angle phi_LM", "rad", &|j| j.stiffness.phi_lm);
    push("offset torque tau_E0", "Nm", &|j| j.stiffness.tau_e0());
    push("lost-motion stiffness c_LM", "Nm/rad", &|j| j.stiffness.c_lm);
    push("torsional rigidity stiffness c_TR", "Nm/rad", &|j| j.stiffness.c_tr);
    push("tanh slope factor s_E1", "1/rad", &|j| j.stiffness.s_e1);
    push("stiffness smoothness factor s_E2", "1/Nm", &|j| j.stiffness.s_e2);
    push("Coulomb friction f_c", "Nm", &|j| j.friction.coulomb);
    push("viscous friction f_v", "Nms/rad", &|j| j.friction.viscous);
    push("friction smoothness factor s_F", "s/rad", &|j| j.friction.smoothness);
    push("proportional speed gain K_V", "Nms/rad", &|j| j.k_v);
    push("proportional position gain K_P", "1/s", &|j| j.k_p);
    push("feed forward torque limit tau_lim", "Nm", &|j| j.tau_lim);
    push("feed forward torque rate limit", "Nm/s", &|j| j.tau_rate_lim);

    let mut out = String::new();
    out.push_str(&format!("parameter set: {name}\n"));
    let desc_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (desc, unit, vals) in &rows {
        out.push_str(&format!("{desc:<desc_w$}  "));
        for v in vals {
            out.push_str(&format!("{v:>12} "));
        }
        out.push_str(&format!(" {unit}\n"));
    }
    Some(out)
}
