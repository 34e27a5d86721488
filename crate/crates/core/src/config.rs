//! TOML scenario configuration for the CLI.
//!
//! A config file starts from a named parameter set and overrides individual
//! values; unknown keys are rejected. Command-line `--override key.path=val`
//! entries are applied to the parsed TOML document before deserialization,
//! so they behave exactly like edits to the file.

use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::{FeedbackKind, FeedforwardKind, ScenarioConfig, Shaping, Variant};
use crate::params::{named_set, JointParams};
use crate::plant::PlantLaw;
use crate::trajectory::{preset, ReferenceSource};

/// Gear ratio as either a float or an exact rational string like "1798/7".
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GearRatio {
    Number(f64),
    Ratio(String),
}

impl GearRatio {
    pub fn value(&self) -> Result<f64> {
        match self {
            GearRatio::Number(v) => Ok(*v),
            GearRatio::Ratio(s) => {
                let (num, den) = s
                    .split_once('/')
                    .ok_or_else(|| Error::config(format!("gear ratio '{s}': expected 'num/den'")))?;
                let num: f64 = num.trim().parse().map_err(|_| {
                    Error::config(format!("gear ratio '{s}': bad numerator"))
                })?;
                let den: f64 = den.trim().parse().map_err(|_| {
                    Error::config(format!("gear ratio '{s}': bad denominator"))
                })?;
                if den == 0.0 {
                    return Err(Error::config(format!("gear ratio '{s}': zero denominator")));
                }
                Ok(num / den)
            }
        }
    }
}

/// Per-joint overrides; every field is optional on top of the defaults set.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointTable {
    pub motor_inertia: Option<f64>,
    pub gear_ratio: Option<GearRatio>,
    pub link_inertia: Option<f64>,
    pub f_v: Option<f64>,
    pub f_c: Option<f64>,
    pub s_f: Option<f64>,
    pub c_lm: Option<f64>,
    pub c_tr: Option<f64>,
    pub phi_b_star: Option<f64>,
    pub phi_lm: Option<f64>,
    pub s_e1: Option<f64>,
    pub s_e2: Option<f64>,
    pub k_p: Option<f64>,
    pub k_v: Option<f64>,
    pub tau_lim: Option<f64>,
    pub tau_rate_lim: Option<f64>,
    pub lp_time_constant: Option<f64>,
}

impl JointTable {
    fn apply(&self, j: &mut JointParams) -> Result<()> {
        if let Some(v) = self.motor_inertia {
            j.motor_inertia = v;
        }
        if let Some(g) = &self.gear_ratio {
            j.gear_ratio = g.value()?;
        }
        if let Some(v) = self.link_inertia {
            j.link_inertia = v;
        }
        if let Some(v) = self.f_v {
            j.friction.viscous = v;
        }
        if let Some(v) = self.f_c {
            j.friction.coulomb = v;
        }
        if let Some(v) = self.s_f {
            j.friction.smoothness = v;
        }
        if let Some(v) = self.c_lm {
            j.stiffness.c_lm = v;
        }
        if let Some(v) = self.c_tr {
            j.stiffness.c_tr = v;
        }
        if let Some(v) = self.phi_b_star {
            j.stiffness.phi_b_star = v;
        }
        if let Some(v) = self.phi_lm {
            j.stiffness.phi_lm = v;
        }
        if let Some(v) = self.s_e1 {
            j.stiffness.s_e1 = v;
        }
        if let Some(v) = self.s_e2 {
            j.stiffness.s_e2 = v;
        }
        if let Some(v) = self.k_p {
            j.k_p = v;
        }
        if let Some(v) = self.k_v {
            j.k_v = v;
        }
        if let Some(v) = self.tau_lim {
            j.tau_lim = v;
        }
        if let Some(v) = self.tau_rate_lim {
            j.tau_rate_lim = v;
        }
        if let Some(v) = self.lp_time_constant {
            j.lp_time_constant = v;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryTable {
    pub preset: String,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimTable {
    /// "piecewise" (hard backlash) or "smooth".
    pub law: Option<String>,
    pub dt_plant: Option<f64>,
    pub dt_ctrl: Option<f64>,
    pub duration: Option<f64>,
    /// Gravity torque amplitude per joint.
    pub gravity: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerTable {
    /// "none", "rigid" or "flatness".
    pub feedforward: Option<String>,
    /// "none", "conventional" or "model-based".
    pub feedback: Option<String>,
    /// "none" (default) or "hw-limits" (magnitude/rate clamp + low-pass from
    /// the joint parameters).
    pub shaping: Option<String>,
    /// Link angle sensor resolution (rad).
    pub quant_q: Option<f64>,
    /// Motor speed sensor resolution (rad/s).
    pub quant_theta_dot: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantTable {
    /// Scales the plant's full-contact stiffness relative to the controller
    /// model (model-mismatch studies).
    pub c_tr_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputTable {
    pub csv: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantTable {
    pub name: String,
    pub feedforward: String,
    pub feedback: String,
}

/// Top-level config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Named parameter set the joints start from.
    #[serde(default = "default_set")]
    pub defaults: String,
    #[serde(default)]
    pub joint: Vec<JointTable>,
    pub trajectory: TrajectoryTable,
    #[serde(default)]
    pub sim: SimTable,
    #[serde(default)]
    pub controller: ControllerTable,
    #[serde(default)]
    pub plant: PlantTable,
    #[serde(default)]
    pub output: OutputTable,
    #[serde(default)]
    pub variants: Vec<VariantTable>,
}

fn default_set() -> String {
    "kr300-joint1".into()
}

fn parse_law(s: &str) -> Result<PlantLaw> {
    match s {
        "piecewise" => Ok(PlantLaw::Piecewise),
        "smooth" => Ok(PlantLaw::Smooth),
        other => Err(Error::config(format!("unknown plant law '{other}'"))),
    }
}

fn parse_ff(s: &str) -> Result<FeedforwardKind> {
    match s {
        "none" => Ok(FeedforwardKind::None),
        "rigid" => Ok(FeedforwardKind::Rigid),
        "flatness" => Ok(FeedforwardKind::Flatness),
        other => Err(Error::config(format!("unknown feedforward '{other}'"))),
    }
}

fn parse_fb(s: &str) -> Result<FeedbackKind> {
    match s {
        "none" => Ok(FeedbackKind::None),
        "conventional" => Ok(FeedbackKind::Conventional),
        "model-based" => Ok(FeedbackKind::ModelBased),
        other => Err(Error::config(format!("unknown feedback '{other}'"))),
    }
}

fn parse_shaping(s: &str) -> Result<Shaping> {
    match s {
        "none" => Ok(Shaping::Disabled),
        "hw-limits" => Ok(Shaping::HwLimits),
        other => Err(Error::config(format!("unknown shaping '{other}'"))),
    }
}

/// A fully resolved scenario ready to run.
pub struct ResolvedConfig {
    pub scenario: ScenarioConfig,
    pub source: Box<dyn ReferenceSource + Send + Sync>,
    pub csv: Option<std::path::PathBuf>,
    pub variants: Vec<Variant>,
}

/// Parses a TOML document (with dotted-path overrides applied first) into a
/// [`FileConfig`].
pub fn parse_config(text: &str, overrides: &[String]) -> Result<FileConfig> {
    let table = toml::Table::from_str(text)
        .map_err(|e| Error::config(format!("TOML parse error: {e}")))?;
    let mut doc = toml::Value::Table(table);
    for ov in overrides {
        apply_override(&mut doc, ov)?;
    }
    doc.try_into().map_err(|e| Error::config(format!("config error: {e}")))
}

/// Loads and parses a config file.
pub fn load_config(path: &std::path::Path, overrides: &[String]) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, overrides)
}

/// Applies one `key.path=value` override to a parsed TOML document. Array
/// elements are addressed by zero-based index (e.g. `joint.0.c_tr=1e6`).
fn apply_override(doc: &mut toml::Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override '{spec}': expected key.path=value")))?;
    let value = parse_scalar(raw.trim());
    let parts: Vec<&str> = path.trim().split('.').collect();
    if parts.is_empty() || parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(format!("override '{spec}': empty path component")));
    }
    let mut cur = doc;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        if let Ok(idx) = part.parse::<usize>() {
            let arr = cur
                .as_array_mut()
                .ok_or_else(|| Error::config(format!("override '{spec}': '{part}' indexes a non-array")))?;
            if idx >= arr.len() {
                return Err(Error::config(format!("override '{spec}': index {idx} out of range")));
            }
            if last {
                arr[idx] = value;
                return Ok(());
            }
            cur = &mut arr[idx];
        } else {
            let table = cur
                .as_table_mut()
                .ok_or_else(|| Error::config(format!("override '{spec}': '{part}' is not a table")))?;
            if last {
                table.insert(part.to_string(), value);
                return Ok(());
            }
            cur = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(Default::default()));
        }
    }
    Ok(())
}

fn parse_scalar(raw: &str) -> toml::Value {
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    toml::Value::String(raw.trim_matches('"').to_string())
}

/// Resolves a parsed file into runnable scenario pieces.
pub fn resolve(file: &FileConfig) -> Result<ResolvedConfig> {
    let base = named_set(&file.defaults)
        .ok_or_else(|| Error::config(format!("unknown parameter set '{}'", file.defaults)))?;

    let mut joints: Vec<JointParams> = if file.joint.is_empty() {
        base.clone()
    } else {
        // Each [[joint]] entry starts from the matching entry of the
        // defaults set (its last joint repeating when the set is shorter).
        file.joint
            .iter()
            .enumerate()
            .map(|(i, table)| {
                let mut j = base[i.min(base.len() - 1)];
                table.apply(&mut j).map(|_| j)
            })
            .collect::<Result<_>>()?
    };
    for (i, j) in joints.iter().enumerate() {
        j.validate()
            .map_err(|e| Error::config(format!("joint {}: {e}", i + 1)))?;
    }

    let source = preset(&file.trajectory.preset, file.trajectory.amplitude)
        .ok_or_else(|| Error::config(format!("unknown preset '{}'", file.trajectory.preset)))?;
    if source.joints() != joints.len() {
        // A multi-joint preset with default single-joint params: replicate.
        if file.joint.is_empty() && joints.len() == 1 {
            joints = vec![joints[0]; source.joints()];
        } else {
            return Err(Error::config(format!(
                "preset '{}' drives {} joints but {} are configured",
                file.trajectory.preset,
                source.joints(),
                joints.len()
            )));
        }
    }

    let mut scenario = ScenarioConfig::new(joints);
    if let Some(law) = &file.sim.law {
        scenario.law = parse_law(law)?;
    }
    if let Some(v) = file.sim.dt_plant {
        scenario.dt_plant = v;
    }
    if let Some(v) = file.sim.dt_ctrl {
        scenario.dt_ctrl = v;
    }
    if let Some(v) = file.sim.duration {
        scenario.duration = v;
    }
    if let Some(g) = &file.sim.gravity {
        if g.len() != scenario.params.len() {
            return Err(Error::config("sim.gravity length must match joint count"));
        }
        scenario.gravity = g.clone();
    }
    if let Some(ff) = &file.controller.feedforward {
        scenario.feedforward = parse_ff(ff)?;
    }
    if let Some(fb) = &file.controller.feedback {
        scenario.feedback = parse_fb(fb)?;
    }
    if let Some(sh) = &file.controller.shaping {
        scenario.shaping = parse_shaping(sh)?;
    }
    if let Some(v) = file.controller.quant_q {
        scenario.quant_q = v;
    }
    if let Some(v) = file.controller.quant_theta_dot {
        scenario.quant_theta_dot = v;
    }
    if let Some(scale) = file.plant.c_tr_scale {
        let mut pp = scenario.params.clone();
        for j in &mut pp {
            j.stiffness.c_tr *= scale;
        }
        scenario.plant_params = Some(pp);
    }

    let variants = file
        .variants
        .iter()
        .map(|v| {
            Ok(Variant {
                name: v.name.clone(),
                feedforward: parse_ff(&v.feedforward)?,
                feedback: parse_fb(&v.feedback)?,
            })
        })
        .collect::<Result<_>>()?;

    Ok(ResolvedConfig {
        scenario,
        source,
        csv: file.output.csv.as_ref().map(std::path::PathBuf::from),
        variants,
    })
}
