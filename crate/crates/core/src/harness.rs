//! Closed-loop scenario execution: reference generation, controller, plant
//! integration, logging, metrics.
//!
//! The controller runs at a fixed control period that is an integer
//! multiple of the plant step; the commanded torque is held (zero-order
//! hold) over the control interval. Feedforward torques are evaluated at
//! the midpoint of each control interval so the held torque is centered on
//! the interval it covers.

use std::io::Write as _;

use crate::control::{feedback, flatness_ff, rigid_ff, sensor_quantize, TorqueShaper};
use crate::error::{Error, Result};
use crate::params::JointParams;
use crate::plant::{ConstantInertia, Plant, PlantLaw, PlantState};
use crate::trajectory::ReferenceSource;

/// Which feedforward the controller applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedforwardKind {
    None,
    Rigid,
    Flatness,
}

/// Which feedback loop runs, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackKind {
    None,
    Conventional,
    ModelBased,
}

/// Output torque conditioning. Disabled by default so simulations match the
/// unshaped controller equations; the hardware-style limits from the joint
/// parameters are opt-in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shaping {
    /// Commanded torque passes through unmodified.
    Disabled,
    /// Magnitude clamp, rate clamp and low-pass from the joint parameters.
    HwLimits,
}

/// Everything needed to run one closed-loop simulation.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    /// Nominal joint parameters: the controller's model, and the plant's
    /// unless overridden.
    pub params: Vec<JointParams>,
    /// Plant-side parameters when they differ from the controller model
    /// (model-mismatch studies).
    pub plant_params: Option<Vec<JointParams>>,
    pub law: PlantLaw,
    /// Gravity torque amplitude per joint (torque = amp * sin(q)).
    pub gravity: Vec<f64>,
    pub dt_plant: f64,
    pub dt_ctrl: f64,
    pub duration: f64,
    pub feedforward: FeedforwardKind,
    pub feedback: FeedbackKind,
    pub shaping: Shaping,
    /// Link angle sensor resolution (rad); 0 disables quantization.
    pub quant_q: f64,
    /// Motor speed sensor resolution (rad/s); 0 disables quantization.
    pub quant_theta_dot: f64,
}

impl ScenarioConfig {
    pub fn new(params: Vec<JointParams>) -> Self {
        let n = params.len();
        Self {
            params,
            plant_params: None,
            law: PlantLaw::Piecewise,
            gravity: vec![0.0; n],
            dt_plant: 1e-4,
            dt_ctrl: 8e-4,
            duration: 7.0,
            feedforward: FeedforwardKind::Flatness,
            feedback: FeedbackKind::None,
            shaping: Shaping::Disabled,
            quant_q: 0.0,
            quant_theta_dot: 0.0,
        }
    }

    /// Number of plant substeps per control tick; errors unless the control
    /// period is an integer multiple of the plant step.
    pub fn substeps(&self) -> Result<usize> {
        if !(self.dt_plant > 0.0 && self.dt_ctrl > 0.0) {
            return Err(Error::config("step sizes must be > 0"));
        }
        let ratio = self.dt_ctrl / self.dt_plant;
        let m = ratio.round();
        if m < 1.0 || (ratio - m).abs() > 1e-9 * ratio {
            return Err(Error::config(format!(
                "control period {} is not an integer multiple of plant step {}",
                self.dt_ctrl, self.dt_plant
            )));
        }
        Ok(m as usize)
    }

    pub fn validate(&self, joints_in_source: usize) -> Result<()> {
        if self.params.is_empty() {
            return Err(Error::config("no joints configured"));
        }
        if self.params.len() != joints_in_source {
            return Err(Error::config(format!(
                "{} joints configured but trajectory has {}",
                self.params.len(),
                joints_in_source
            )));
        }
        if self.gravity.len() != self.params.len() {
            return Err(Error::config("gravity vector length mismatch"));
        }
        if let Some(pp) = &self.plant_params {
            if pp.len() != self.params.len() {
                return Err(Error::config("plant parameter override length mismatch"));
            }
            for j in pp {
                j.validate().map_err(|e| Error::config(e.to_string()))?;
            }
        }
        for j in &self.params {
            j.validate().map_err(|e| Error::config(e.to_string()))?;
        }
        if !(self.duration >= 0.0) {
            return Err(Error::config("duration must be >= 0"));
        }
        if !(self.quant_q >= 0.0 && self.quant_theta_dot >= 0.0) {
            return Err(Error::config("sensor resolutions must be >= 0"));
        }
        self.substeps()?;
        Ok(())
    }
}

/// Per-joint time series sampled at the control rate.
#[derive(Debug, Clone, Default)]
pub struct JointTrace {
    pub q_r: Vec<f64>,
    pub q_r_dot: Vec<f64>,
    pub q: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_dot: Vec<f64>,
    pub dq: Vec<f64>,
    pub tau_e: Vec<f64>,
    pub tau_m: Vec<f64>,
    pub tau_ff: Vec<f64>,
    pub tau_c: Vec<f64>,
}

/// Full simulation log.
#[derive(Debug, Clone, Default)]
pub struct SimLog {
    pub t: Vec<f64>,
    pub joints: Vec<JointTrace>,
}

impl SimLog {
    /// Writes the log as CSV with full round-trip precision, so repeated
    /// runs of the same scenario are byte-identical.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t")?;
        for j in 1..=self.joints.len() {
            write!(
                w,
                ",q_R{j},q{j},theta{j},theta_dot{j},dq{j},tau_E{j},tau_M{j},tau_FF{j},tau_C{j}"
            )?;
        }
        writeln!(w)?;
        for k in 0..self.t.len() {
            write!(w, "{:.16e}", self.t[k])?;
            for tr in &self.joints {
                write!(
                    w,
                    ",{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    tr.q_r[k],
                    tr.q[k],
                    tr.theta[k],
                    tr.theta_dot[k],
                    tr.dq[k],
                    tr.tau_e[k],
                    tr.tau_m[k],
                    tr.tau_ff[k],
                    tr.tau_c[k]
                )?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut buf = std::io::BufWriter::new(f);
        self.write_csv(&mut buf)?;
        buf.flush()?;
        Ok(())
    }
}

/// Runs one closed-loop scenario against the given reference source.
pub fn run_scenario(cfg: &ScenarioConfig, source: &dyn ReferenceSource) -> Result<SimLog> {
    cfg.validate(source.joints())?;
    let n = cfg.params.len();
    let substeps = cfg.substeps()?;

    let plant_joints = cfg.plant_params.clone().unwrap_or_else(|| cfg.params.clone());
    let body = ConstantInertia {
        inertia: plant_joints.iter().map(|j| j.link_inertia).collect(),
        gravity_amplitude: cfg.gravity.clone(),
    };
    let plant = Plant::new(plant_joints, cfg.law, Box::new(body))?;

    // Start from a state consistent with the controller's own motor
    // reference, as if it had been tracking steadily before t = 0; otherwise
    // the first sample applies a torque step into an unloaded gearbox.
    let start = source.sample(0.0)?;
    let gear: Vec<f64> = cfg.params.iter().map(|j| j.gear_ratio).collect();
    let mut state = PlantState::at_link_angles(&start.pos, &gear);
    for i in 0..n {
        let p = &cfg.params[i];
        state.q_dot[i] = start.vel[i];
        match cfg.feedforward {
            FeedforwardKind::Flatness => {
                let r = flatness_ff(
                    start.pos[i],
                    start.vel[i],
                    start.acc[i],
                    start.jerk[i],
                    start.snap[i],
                    p.link_inertia,
                    cfg.gravity[i],
                    p,
                )?;
                state.theta[i] = r.theta_r;
                state.theta_dot[i] = r.theta_dot_r;
            }
            FeedforwardKind::Rigid | FeedforwardKind::None => {
                state.theta_dot[i] = p.gear_ratio * start.vel[i];
            }
        }
    }

    let mut shapers: Vec<TorqueShaper> = match cfg.shaping {
        Shaping::Disabled => Vec::new(),
        Shaping::HwLimits => cfg
            .params
            .iter()
            .map(|j| TorqueShaper::new(j, cfg.dt_ctrl))
            .collect::<Result<_>>()?,
    };

    let ticks = (cfg.duration / cfg.dt_ctrl).round() as usize;
    let mut log = SimLog { t: Vec::with_capacity(ticks), joints: vec![JointTrace::default(); n] };

    let mut tau = vec![0.0; n];
    for k in 0..ticks {
        let t = k as f64 * cfg.dt_ctrl;
        let at_tick = source.sample(t)?;
        // Feedforward evaluated at the interval midpoint (the torque is held
        // over [t, t + dt_ctrl)).
        let mid = source.sample(t + 0.5 * cfg.dt_ctrl)?;

        let tau_e_now = plant.coupling_torque(&state);
        for i in 0..n {
            let p = &cfg.params[i];
            let tau_ff = match cfg.feedforward {
                FeedforwardKind::None => 0.0,
                FeedforwardKind::Rigid => rigid_ff(
                    mid.pos[i],
                    mid.vel[i],
                    mid.acc[i],
                    p.link_inertia,
                    cfg.gravity[i],
                    p,
                ),
                FeedforwardKind::Flatness => {
                    flatness_ff(
                        mid.pos[i],
                        mid.vel[i],
                        mid.acc[i],
                        mid.jerk[i],
                        mid.snap[i],
                        p.link_inertia,
                        cfg.gravity[i],
                        p,
                    )
                    .map_err(|e| match e {
                        Error::Controller { detail, .. } => Error::Controller { joint: i, detail },
                        other => other,
                    })?
                    .tau_ff
                }
            };

            let tau_c = match cfg.feedback {
                FeedbackKind::None => 0.0,
                FeedbackKind::Conventional | FeedbackKind::ModelBased => {
                    let q_meas = sensor_quantize(state.q[i], cfg.quant_q);
                    let theta_dot_meas =
                        sensor_quantize(state.theta_dot[i], cfg.quant_theta_dot);
                    let theta_dot_ref = match cfg.feedback {
                        FeedbackKind::Conventional => p.gear_ratio * at_tick.vel[i],
                        FeedbackKind::ModelBased => flatness_ff(
                            at_tick.pos[i],
                            at_tick.vel[i],
                            at_tick.acc[i],
                            at_tick.jerk[i],
                            at_tick.snap[i],
                            p.link_inertia,
                            cfg.gravity[i],
                            p,
                        )?
                        .theta_dot_r,
                        FeedbackKind::None => unreachable!(),
                    };
                    feedback(at_tick.pos[i] - q_meas, theta_dot_ref, theta_dot_meas, p)
                }
            };

            tau[i] = match cfg.shaping {
                Shaping::Disabled => tau_ff + tau_c,
                Shaping::HwLimits => shapers[i].apply(tau_ff + tau_c),
            };

            let tr = &mut log.joints[i];
            tr.q_r.push(at_tick.pos[i]);
            tr.q_r_dot.push(at_tick.vel[i]);
            tr.q.push(state.q[i]);
            tr.theta.push(state.theta[i]);
            tr.theta_dot.push(state.theta_dot[i]);
            tr.dq.push(state.theta[i] / p.gear_ratio - state.q[i]);
            tr.tau_e.push(tau_e_now[i]);
            tr.tau_m.push(tau[i]);
            tr.tau_ff.push(tau_ff);
            tr.tau_c.push(tau_c);
        }
        log.t.push(t);

        for s in 0..substeps {
            state = plant.step(&state, &tau, cfg.dt_plant, t + s as f64 * cfg.dt_plant)?;
        }
    }
    Ok(log)
}

/// Summary metrics for one joint of a finished run.
#[derive(Debug, Clone, Copy)]
pub struct JointMetrics {
    /// Maximum absolute link tracking error (deg).
    pub max_err_deg: f64,
    /// Mean absolute link tracking error (deg).
    pub mean_err_deg: f64,
    /// Largest peak-to-peak elastic torque ripple inside any of the
    /// post-reversal observation windows (N·m); 0 when there is no reversal.
    /// The slow commanded component is removed with a moving average first,
    /// so this measures the oscillation excited by the backlash traversal,
    /// not the torque needed for the motion itself.
    pub reversal_tau_e_p2p: f64,
    /// Maximum commanded torque slew rate (N·m/s).
    pub max_tau_rate: f64,
}

/// Length of the elastic-transient observation window opened at each
/// reference velocity reversal (s).
pub const REVERSAL_WINDOW: f64 = 0.5;

/// Width of the centered moving average that removes the commanded torque
/// trend before the ripple is measured (s). Chosen well above the torsional
/// mode period and well below the motion timescale.
pub const REVERSAL_DETREND: f64 = 0.05;

/// Computes per-joint summary metrics from a log; the log must be non-empty.
pub fn compute_metrics(log: &SimLog, dt_ctrl: f64) -> Result<Vec<JointMetrics>> {
    if log.t.is_empty() {
        return Err(Error::domain("compute_metrics: empty log"));
    }
    let deg = 180.0 / std::f64::consts::PI;
    Ok(log
        .joints
        .iter()
        .map(|tr| {
            let mut max_err = 0.0f64;
            let mut sum_err = 0.0f64;
            for (q, q_r) in tr.q.iter().zip(&tr.q_r) {
                let e = (q - q_r).abs();
                max_err = max_err.max(e);
                sum_err += e;
            }
            let n = tr.q.len() as f64;

            // Reference velocity reversals open observation windows on the
            // elastic torque.
            let mut p2p = 0.0f64;
            let mut last_sign = 0.0f64;
            for k in 0..tr.q_r_dot.len() {
                let v = tr.q_r_dot[k];
                let sign = if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    last_sign
                };
                if last_sign != 0.0 && sign != 0.0 && sign != last_sign {
                    let end =
                        (k + (REVERSAL_WINDOW / dt_ctrl).round() as usize).min(tr.tau_e.len());
                    let half = ((0.5 * REVERSAL_DETREND / dt_ctrl).round() as usize).max(1);
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for i in k..end {
                        let a = i.saturating_sub(half);
                        let b = (i + half + 1).min(tr.tau_e.len());
                        let avg = tr.tau_e[a..b].iter().sum::<f64>() / (b - a) as f64;
                        let ripple = tr.tau_e[i] - avg;
                        lo = lo.min(ripple);
                        hi = hi.max(ripple);
                    }
                    p2p = p2p.max(hi - lo);
                }
                last_sign = sign;
            }

            let max_tau_rate = tr
                .tau_m
                .windows(2)
                .map(|w| ((w[1] - w[0]) / dt_ctrl).abs())
                .fold(0.0f64, f64::max);

            JointMetrics {
                max_err_deg: max_err * deg,
                mean_err_deg: sum_err / n * deg,
                reversal_tau_e_p2p: p2p,
                max_tau_rate,
            }
        })
        .collect())
}

/// One controller variant for a comparison run.
#[derive(Debug, Clone)]
pub struct Variant {
    pub name: String,
    pub feedforward: FeedforwardKind,
    pub feedback: FeedbackKind,
}

/// Result of one variant of a comparison run.
pub struct VariantResult {
    pub name: String,
    pub log: SimLog,
    pub metrics: Vec<JointMetrics>,
}

/// Runs the same scenario under each variant; at least two variants are
/// required for a comparison.
pub fn compare(
    cfg: &ScenarioConfig,
    source: &dyn ReferenceSource,
    variants: &[Variant],
) -> Result<Vec<VariantResult>> {
    if variants.len() < 2 {
        return Err(Error::config("comparison needs at least two variants"));
    }
    let mut out = Vec::with_capacity(variants.len());
    for v in variants {
        let mut c = cfg.clone();
        c.feedforward = v.feedforward;
        c.feedback = v.feedback;
        let log = run_scenario(&c, source)?;
        let metrics = compute_metrics(&log, c.dt_ctrl)?;
        out.push(VariantResult { name: v.name.clone(), log, metrics });
    }
    Ok(out)
}
