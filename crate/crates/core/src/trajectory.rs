//! Reference trajectory generation.
//!
//! Joint-space profiles are built from a degree-9 polynomial segment with
//! vanishing derivatives through 4th order at both ends, so the composed
//! reference is C⁴ everywhere — the smoothness the elastic-joint feedforward
//! needs. A planar Lemniscate of Gerono traced by a 2R arm is provided as a
//! Cartesian demo, with backward finite differences as the derivative
//! fallback.

use crate::error::{Error, Result};

/// Link reference angle and derivatives through 4th order at one control
/// tick, per joint.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSample {
    pub t: f64,
    pub pos: Vec<f64>,
    pub vel: Vec<f64>,
    pub acc: Vec<f64>,
    pub jerk: Vec<f64>,
    pub snap: Vec<f64>,
}

impl ReferenceSample {
    pub fn rest(joints: usize, t: f64) -> Self {
        Self {
            t,
            pos: vec![0.0; joints],
            vel: vec![0.0; joints],
            acc: vec![0.0; joints],
            jerk: vec![0.0; joints],
            snap: vec![0.0; joints],
        }
    }
}

/// Lemniscate of Gerono: `x = a cos(phi)`, `y = b sin(phi) cos(phi)`.
pub fn lemniscate(phi: f64, a: f64, b: f64) -> (f64, f64) {
    (a * phi.cos(), b * phi.sin() * phi.cos())
}

/// Degree-9 minimal polynomial rising from 0 to 1 over `[0, total]` with
/// zero derivatives through 4th order at both endpoints. Returns the value
/// and its first four time derivatives; times outside the interval clamp to
/// the endpoint values.
pub fn smooth_profile(t: f64, total: f64) -> [f64; 5] {
    if t <= 0.0 {
        return [0.0; 5];
    }
    if t >= total {
        return [1.0, 0.0, 0.0, 0.0, 0.0];
    }
    // s(x) = 126 x^5 - 420 x^6 + 540 x^7 - 315 x^8 + 70 x^9
    let mut coeff = [0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0];
    let x = t / total;
    let mut out = [0.0; 5];
    let mut scale = 1.0;
    for (order, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for &c in coeff.iter().rev() {
            acc = acc * x + c;
        }
        *slot = acc * scale;
        scale /= total;
        // Differentiate the coefficient vector in place.
        for k in 1..coeff.len() {
            coeff[k - 1] = coeff[k] * k as f64;
        }
        let n = coeff.len();
        coeff[n - 1 - order.min(n - 1)] = 0.0;
        coeff[n - 1] = 0.0;
    }
    out
}

/// One motion segment: a relative move followed by a dwell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// Relative displacement of the move (rad).
    pub delta: f64,
    /// Move duration (s).
    pub duration: f64,
    /// Dwell after the move (s).
    pub dwell: f64,
}

/// A joint-space profile: a sequence of smooth moves and dwells, applied
/// identically to every joint and scaled by `amplitude`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub segments: Vec<Segment>,
    pub amplitude: f64,
    pub joints: usize,
}

impl ProfileSpec {
    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration + s.dwell).sum()
    }

    /// Net displacement (rad) after all segments, before amplitude scaling.
    pub fn total_displacement(&self) -> f64 {
        self.segments.iter().map(|s| s.delta).sum()
    }
}

/// Samples the composed profile at time `t >= 0`. Past the last segment the
/// reference holds the final angle with zero derivatives.
pub fn joint_reference(spec: &ProfileSpec, t: f64) -> Result<ReferenceSample> {
    if spec.segments.is_empty() {
        return Err(Error::domain("joint_reference: empty profile"));
    }
    if !(t >= 0.0) {
        return Err(Error::domain("joint_reference: time must be >= 0"));
    }
    let mut base = 0.0;
    let mut t0 = 0.0;
    let mut sample = [0.0; 5];
    let mut done = true;
    for seg in &spec.segments {
        if t < t0 + seg.duration {
            let s = smooth_profile(t - t0, seg.duration);
            sample = [
                base + seg.delta * s[0],
                seg.delta * s[1],
                seg.delta * s[2],
                seg.delta * s[3],
                seg.delta * s[4],
            ];
            done = false;
            break;
        }
        base += seg.delta;
        t0 += seg.duration;
        if t < t0 + seg.dwell {
            sample = [base, 0.0, 0.0, 0.0, 0.0];
            done = false;
            break;
        }
        t0 += seg.dwell;
    }
    if done {
        sample = [base, 0.0, 0.0, 0.0, 0.0];
    }
    let a = spec.amplitude;
    Ok(ReferenceSample {
        t,
        pos: vec![a * sample[0]; spec.joints],
        vel: vec![a * sample[1]; spec.joints],
        acc: vec![a * sample[2]; spec.joints],
        jerk: vec![a * sample[3]; spec.joints],
        snap: vec![a * sample[4]; spec.joints],
    })
}

/// Closed-form elbow-up inverse kinematics of a planar 2R arm.
pub fn planar_2r_ik(x: f64, y: f64, l1: f64, l2: f64) -> Result<(f64, f64)> {
    let r2 = x * x + y * y;
    let mut c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    if c2 > 1.0 + 1e-9 || c2 < -1.0 - 1e-9 {
        return Err(Error::domain(format!("planar_2r_ik: ({x}, {y}) outside workspace")));
    }
    c2 = c2.clamp(-1.0, 1.0);
    let q2 = -c2.acos(); // elbow-up branch
    let q1 = y.atan2(x) - (l2 * q2.sin()).atan2(l1 + l2 * q2.cos());
    Ok((q1, q2))
}

/// Forward kinematics of the planar 2R arm.
pub fn planar_2r_fk(q1: f64, q2: f64, l1: f64, l2: f64) -> (f64, f64) {
    (
        l1 * q1.cos() + l2 * (q1 + q2).cos(),
        l1 * q1.sin() + l2 * (q1 + q2).sin(),
    )
}

/// Backward finite differences of orders 1..4 from the last five samples
/// (oldest first), with the corrected `+q_{k-4}` coefficient on the 4th
/// difference. Each output is clamped to the matching `limits` entry when
/// given.
pub fn finite_differences(
    history: &[f64; 5],
    sample_time: f64,
    limits: Option<&[(f64, f64); 4]>,
) -> Result<[f64; 4]> {
    if !(sample_time > 0.0) {
        return Err(Error::domain("finite_differences: sample time must be > 0"));
    }
    let [q4, q3, q2, q1, q0] = *history; // q0 newest, q4 four samples back
    let t = sample_time;
    let mut d = [
        (q0 - q1) / t,
        (q0 - 2.0 * q1 + q2) / (t * t),
        (q0 - 3.0 * q1 + 3.0 * q2 - q3) / (t * t * t),
        (q0 - 4.0 * q1 + 6.0 * q2 - 4.0 * q3 + q4) / (t * t * t * t),
    ];
    if let Some(lim) = limits {
        for (v, (lo, hi)) in d.iter_mut().zip(lim.iter()) {
            *v = v.clamp(*lo, *hi);
        }
    }
    Ok(d)
}

/// A time-parameterized C⁴ reference trajectory source.
pub trait ReferenceSource {
    fn joints(&self) -> usize;
    fn sample(&self, t: f64) -> Result<ReferenceSample>;
}

impl ReferenceSource for ProfileSpec {
    fn joints(&self) -> usize {
        self.joints
    }

    fn sample(&self, t: f64) -> Result<ReferenceSample> {
        joint_reference(self, t)
    }
}

/// Lemniscate of Gerono traced by a planar 2R arm; joint references via IK
/// and backward finite differences (the fallback path for references without
/// analytic derivatives).
#[derive(Debug, Clone)]
pub struct Lemniscate2R {
    pub a: f64,
    pub b: f64,
    pub l1: f64,
    pub l2: f64,
    /// Time for one full traversal (s).
    pub period: f64,
    /// Finite-difference sample time (s).
    pub fd_step: f64,
}

impl Lemniscate2R {
    fn angles_at(&self, t: f64) -> Result<(f64, f64)> {
        let s = smooth_profile(t, self.period)[0];
        let phi = 2.0 * std::f64::consts::PI * s;
        let (x, y) = lemniscate(phi, self.a, self.b);
        planar_2r_ik(x, y, self.l1, self.l2)
    }
}

impl ReferenceSource for Lemniscate2R {
    fn joints(&self) -> usize {
        2
    }

    fn sample(&self, t: f64) -> Result<ReferenceSample> {
        let h = self.fd_step;
        let mut hist = [[0.0; 5]; 2];
        for k in 0..5 {
            let tk = (t - (4 - k) as f64 * h).max(0.0);
            let (q1, q2) = self.angles_at(tk)?;
            hist[0][k] = q1;
            hist[1][k] = q2;
        }
        let mut out = ReferenceSample::rest(2, t);
        for j in 0..2 {
            out.pos[j] = hist[j][4];
            let d = finite_differences(&hist[j], h, None)?;
            out.vel[j] = d[0];
            out.acc[j] = d[1];
            out.jerk[j] = d[2];
            out.snap[j] = d[3];
        }
        Ok(out)
    }
}

/// Raised-cosine oscillation `A/2 (1 - cos(2 pi t / period))` with its
/// amplitude ramped in smoothly over the first period. Unlike the segment
/// profiles, the steady-state velocity zero-crossings coincide with the
/// acceleration peaks: the joint reverses under full load, the harshest case
/// for the gear transmission.
#[derive(Debug, Clone)]
pub struct RaisedCosine {
    pub amplitude: f64,
    pub period: f64,
}

impl ReferenceSource for RaisedCosine {
    fn joints(&self) -> usize {
        1
    }

    fn sample(&self, t: f64) -> Result<ReferenceSample> {
        if !(t >= 0.0) {
            return Err(Error::domain("raised cosine: time must be >= 0"));
        }
        if !(self.period > 0.0) {
            return Err(Error::domain("raised cosine: period must be > 0"));
        }
        let omega = 2.0 * std::f64::consts::PI / self.period;
        let half = 0.5 * self.amplitude;
        let (s, c) = (omega * t).sin_cos();
        // f = A/2 (1 - cos), with derivatives cycling through sin/cos.
        let mut f = [0.0; 5];
        f[0] = half * (1.0 - c);
        let cycle = [s, c, -s, -c];
        let mut wk = omega;
        for k in 1..5 {
            f[k] = half * wk * cycle[k - 1];
            wk *= omega;
        }
        // Envelope w(t): smooth step over the first period, then 1.
        let w = if t < self.period { smooth_profile(t, self.period) } else { [1.0, 0.0, 0.0, 0.0, 0.0] };
        // Leibniz rule for the first four derivatives of f * w.
        const BINOM: [[f64; 5]; 5] = [
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [1.0, 1.0, 0.0, 0.0, 0.0],
            [1.0, 2.0, 1.0, 0.0, 0.0],
            [1.0, 3.0, 3.0, 1.0, 0.0],
            [1.0, 4.0, 6.0, 4.0, 1.0],
        ];
        let mut d = [0.0; 5];
        for k in 0..5 {
            for j in 0..=k {
                d[k] += BINOM[k][j] * f[k - j] * w[j];
            }
        }
        let mut out = ReferenceSample::rest(1, t);
        out.pos[0] = d[0];
        out.vel[0] = d[1];
        out.acc[0] = d[2];
        out.jerk[0] = d[3];
        out.snap[0] = d[4];
        Ok(out)
    }
}

/// Named trajectory presets selectable from the CLI.
pub fn preset(name: &str, amplitude: f64) -> Option<Box<dyn ReferenceSource + Send + Sync>> {
    match name {
        // Several direction changes and near-zero-velocity dwells, for
        // exciting backlash and Coulomb friction.
        "demanding" => Some(Box::new(ProfileSpec {
            segments: vec![
                Segment { delta: 0.5, duration: 1.5, dwell: 0.5 },
                Segment { delta: -0.5, duration: 1.5, dwell: 0.5 },
                Segment { delta: 0.5, duration: 1.5, dwell: 0.5 },
            ],
            amplitude,
            joints: 1,
        })),
        // Fast point-to-point moves with dwells long enough for gearbox
        // ringing to settle in the dead zone, for stressing the transmission.
        "aggressive" => Some(Box::new(ProfileSpec {
            segments: vec![
                Segment { delta: 0.5, duration: 0.7, dwell: 1.0 },
                Segment { delta: -0.5, duration: 0.7, dwell: 1.0 },
                Segment { delta: 0.5, duration: 0.7, dwell: 1.0 },
            ],
            amplitude,
            joints: 1,
        })),
        // Single smooth move, no reversal.
        "step-free-ramp" => Some(Box::new(ProfileSpec {
            segments: vec![Segment { delta: 1.0, duration: 3.0, dwell: 0.5 }],
            amplitude,
            joints: 1,
        })),
        "lemniscate2r" => Some(Box::new(Lemniscate2R {
            a: 0.8,
            b: 0.8,
            l1: 0.9,
            l2: 0.9,
            period: 7.0,
            fd_step: 1e-3,
        })),
        _ => None,
    }
}

pub fn preset_names() -> &'static [&'static str] {
    &["demanding", "aggressive", "step-free-ramp", "lemniscate2r"]
}
