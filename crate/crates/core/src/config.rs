//! TOML run configuration. Angles are written in degrees, lengths in mm,
//! everything else in SI units. Every section and key is optional; missing
//! keys take the library defaults and unknown keys are rejected.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::control::{GainSchedule, TouchConfig};
use crate::geometry::Vec2;
use crate::harness::HarnessParams;
use crate::mechanism::JointVector;
use crate::world::SettleThresholds;

/// A configuration problem, anchored to a 1-based line where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixSelection {
    #[default]
    Default,
    Enveloping,
    Transition,
}

impl FromStr for MatrixSelection {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(Self::Default),
            "enveloping" => Ok(Self::Enveloping),
            "transition" => Ok(Self::Transition),
            _ => Err(format!("unknown matrix '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceLevel {
    #[default]
    Off,
    /// Only trials that did not succeed.
    Failures,
    All,
}

impl TraceLevel {
    pub fn wants(self, success: bool) -> bool {
        match self {
            TraceLevel::Off => false,
            TraceLevel::Failures => !success,
            TraceLevel::All => true,
        }
    }
}

impl FromStr for TraceLevel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(Self::Off),
            "failures" => Ok(Self::Failures),
            "all" => Ok(Self::All),
            _ => Err(format!("unknown trace level '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GripperSection {
    pub proximal_length_mm: f64,
    pub distal_length_mm: f64,
    pub link_radius_mm: f64,
    /// Distance between the two finger bases, mm.
    pub base_spacing_mm: f64,
    pub joint_pulley_radius_mm: f64,
    /// N·m/rad
    pub restoring_stiffness: f64,
    pub proximal_limits_deg: [f64; 2],
    pub distal_limits_deg: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeaSection {
    /// N·m/rad
    pub spring_stiffness: f64,
    pub pulley_radius_mm: f64,
    pub output_radius_mm: f64,
    pub motor_max_speed_deg_s: f64,
    pub motor_range_deg: [f64; 2],
    pub servo_time_constant: f64,
    pub pulley_position_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    pub tangential_stiffness: f64,
    pub tangential_damping: f64,
    pub slip_velocity: f64,
    pub joint_inertia: f64,
    pub joint_damping: f64,
    pub object_linear_damping: f64,
    pub object_angular_damping: f64,
    pub object_mass: f64,
    pub substep: f64,
    pub control_period: f64,
    pub angle_noise_deg: f64,
    pub torque_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSection {
    pub b: [f64; 6],
    pub w: [f64; 4],
    pub integrator_limit: f64,
    pub proximal_torque: f64,
    pub distal_torque: f64,
    pub fixed_ratio_torque: f64,
    pub transition_ratio: f64,
    pub approach_torque: f64,
    pub touch_torque_factor: f64,
    pub touch_speed_deg_s: f64,
    pub touch_hold_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessSection {
    pub approach_timeout: f64,
    pub trial_timeout: f64,
    pub transition_timeout: f64,
    pub min_squeeze_time: f64,
    pub settle_window: f64,
    pub settle_joint_speed_deg_s: f64,
    pub settle_object_speed: f64,
    pub settle_object_angular_speed_deg_s: f64,
    pub settle_motor_speed_deg_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub matrix: MatrixSelection,
    pub output_dir: PathBuf,
    pub trace: TraceLevel,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub repetitions: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub gripper: GripperSection,
    pub sea: SeaSection,
    pub physics: PhysicsSection,
    pub controller: ControllerSection,
    pub harness: HarnessSection,
    pub run: RunSection,
}

impl Default for GripperSection {
    fn default() -> Self {
        let p = HarnessParams::default().plant.gripper;
        Self {
            proximal_length_mm: mm(p.proximal_length),
            distal_length_mm: mm(p.distal_length),
            link_radius_mm: mm(p.link_capsule_radius),
            base_spacing_mm: mm(p.finger_base_positions[1].x - p.finger_base_positions[0].x),
            joint_pulley_radius_mm: mm(p.joint_pulley_radius),
            restoring_stiffness: p.restoring_stiffness[0],
            proximal_limits_deg: p.joint_limits[0].map(deg),
            distal_limits_deg: p.joint_limits[1].map(deg),
        }
    }
}

impl Default for SeaSection {
    fn default() -> Self {
        let s = HarnessParams::default().plant.sea;
        Self {
            spring_stiffness: s.spring_stiffness,
            pulley_radius_mm: mm(s.pulley_radius),
            output_radius_mm: mm(s.output_radius),
            motor_max_speed_deg_s: deg(s.motor_max_speed),
            motor_range_deg: s.motor_angle_range.map(deg),
            servo_time_constant: s.servo_time_constant,
            pulley_position_gain: s.pulley_position_gain,
        }
    }
}

impl Default for PhysicsSection {
    fn default() -> Self {
        let p = HarnessParams::default().plant;
        let ph = p.physics;
        Self {
            contact_stiffness: ph.penalty.kn,
            contact_damping: ph.penalty.cn,
            tangential_stiffness: ph.penalty.kt,
            tangential_damping: ph.penalty.ct,
            slip_velocity: ph.penalty.slip_velocity,
            joint_inertia: ph.joint_inertia,
            joint_damping: ph.joint_damping,
            object_linear_damping: ph.object_linear_damping,
            object_angular_damping: ph.object_angular_damping,
            object_mass: ph.object_mass,
            substep: ph.substep,
            control_period: p.control_period,
            angle_noise_deg: deg(p.noise.angle_std),
            torque_noise: p.noise.torque_std,
        }
    }
}

impl Default for ControllerSection {
    fn default() -> Self {
        let h = HarnessParams::default();
        Self {
            b: h.gains.b,
            w: h.gains.w,
            integrator_limit: h.integrator_limit,
            proximal_torque: h.max_torques[0],
            distal_torque: h.max_torques[1],
            fixed_ratio_torque: h.fixed_ratio_torque,
            transition_ratio: h.transition_ratio,
            approach_torque: h.touch.approach_torque,
            touch_torque_factor: h.touch.torque_factor,
            touch_speed_deg_s: deg(h.touch.speed_threshold),
            touch_hold_time: h.touch.hold_time,
        }
    }
}

impl Default for HarnessSection {
    fn default() -> Self {
        let h = HarnessParams::default();
        Self {
            approach_timeout: h.approach_timeout,
            trial_timeout: h.trial_timeout,
            transition_timeout: h.transition_timeout,
            min_squeeze_time: h.min_squeeze_time,
            settle_window: h.settle.window,
            settle_joint_speed_deg_s: deg(h.settle.joint_speed),
            settle_object_speed: h.settle.object_speed,
            settle_object_angular_speed_deg_s: deg(h.settle.object_angular_speed),
            settle_motor_speed_deg_s: deg(h.settle.motor_speed),
        }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            matrix: MatrixSelection::Default,
            output_dir: PathBuf::from("results"),
            trace: TraceLevel::Off,
            jobs: 0,
            repetitions: 1,
            seed: 0,
        }
    }
}

/// Display value for a default, preferring a short decimal when it converts
/// back to exactly the same SI number.
fn shown(si: f64, scale: f64) -> f64 {
    let raw = si * scale;
    let short = (raw * 1e9).round() / 1e9;
    if short / scale == si {
        short
    } else {
        raw
    }
}

fn mm(m: f64) -> f64 {
    shown(m, 1000.0)
}

fn deg(rad: f64) -> f64 {
    let short = (rad.to_degrees() * 1e9).round() / 1e9;
    if short.to_radians() == rad {
        short
    } else {
        rad.to_degrees()
    }
}

/// 1-based line holding byte `offset`.
fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line where `key` is assigned inside `[section]`, if it is written out.
fn key_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl RunConfig {
    /// Parse and validate. Syntax errors, unknown keys and bad values all
    /// report the offending line.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError {
            line: e.span().map(|s| line_at(text, s.start)),
            message: e.message().trim().to_string(),
        })?;
        config
            .validate()
            .map_err(|(section, key, message)| ConfigError {
                line: key_line(text, section, key),
                message: format!("{section}.{key}: {message}"),
            })?;
        config.harness_params().map_err(|message| ConfigError {
            line: None,
            message,
        })?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    fn validate(&self) -> Result<(), (&'static str, &'static str, String)> {
        let g = &self.gripper;
        let s = &self.sea;
        let p = &self.physics;
        let c = &self.controller;
        let h = &self.harness;
        let positive = [
            ("gripper", "proximal_length_mm", g.proximal_length_mm),
            ("gripper", "distal_length_mm", g.distal_length_mm),
            ("gripper", "link_radius_mm", g.link_radius_mm),
            ("gripper", "base_spacing_mm", g.base_spacing_mm),
            (
                "gripper",
                "joint_pulley_radius_mm",
                g.joint_pulley_radius_mm,
            ),
            ("sea", "spring_stiffness", s.spring_stiffness),
            ("sea", "pulley_radius_mm", s.pulley_radius_mm),
            ("sea", "output_radius_mm", s.output_radius_mm),
            ("sea", "motor_max_speed_deg_s", s.motor_max_speed_deg_s),
            ("sea", "pulley_position_gain", s.pulley_position_gain),
            ("physics", "contact_stiffness", p.contact_stiffness),
            ("physics", "tangential_stiffness", p.tangential_stiffness),
            ("physics", "slip_velocity", p.slip_velocity),
            ("physics", "joint_inertia", p.joint_inertia),
            ("physics", "object_mass", p.object_mass),
            ("physics", "substep", p.substep),
            ("physics", "control_period", p.control_period),
            ("controller", "integrator_limit", c.integrator_limit),
            ("controller", "proximal_torque", c.proximal_torque),
            ("controller", "fixed_ratio_torque", c.fixed_ratio_torque),
            ("controller", "approach_torque", c.approach_torque),
            ("controller", "touch_torque_factor", c.touch_torque_factor),
            ("controller", "touch_speed_deg_s", c.touch_speed_deg_s),
            ("harness", "approach_timeout", h.approach_timeout),
            ("harness", "trial_timeout", h.trial_timeout),
            ("harness", "transition_timeout", h.transition_timeout),
            ("harness", "settle_window", h.settle_window),
            (
                "harness",
                "settle_joint_speed_deg_s",
                h.settle_joint_speed_deg_s,
            ),
            ("harness", "settle_object_speed", h.settle_object_speed),
            (
                "harness",
                "settle_object_angular_speed_deg_s",
                h.settle_object_angular_speed_deg_s,
            ),
            (
                "harness",
                "settle_motor_speed_deg_s",
                h.settle_motor_speed_deg_s,
            ),
        ];
        for (section, key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err((section, key, format!("must be a positive number, got {v}")));
            }
        }
        let non_negative = [
            ("gripper", "restoring_stiffness", g.restoring_stiffness),
            ("sea", "servo_time_constant", s.servo_time_constant),
            ("physics", "contact_damping", p.contact_damping),
            ("physics", "tangential_damping", p.tangential_damping),
            ("physics", "joint_damping", p.joint_damping),
            ("physics", "object_linear_damping", p.object_linear_damping),
            (
                "physics",
                "object_angular_damping",
                p.object_angular_damping,
            ),
            ("physics", "angle_noise_deg", p.angle_noise_deg),
            ("physics", "torque_noise", p.torque_noise),
            ("controller", "distal_torque", c.distal_torque),
            ("controller", "touch_hold_time", c.touch_hold_time),
            ("harness", "min_squeeze_time", h.min_squeeze_time),
        ];
        for (section, key, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err((section, key, format!("must be >= 0, got {v}")));
            }
        }
        if c.b.iter().chain(&c.w).any(|v| !v.is_finite()) {
            let key = if c.b.iter().any(|v| !v.is_finite()) {
                "b"
            } else {
                "w"
            };
            return Err(("controller", key, "gains must be finite".into()));
        }
        let ordered = [
            ("gripper", "proximal_limits_deg", g.proximal_limits_deg),
            ("gripper", "distal_limits_deg", g.distal_limits_deg),
            ("sea", "motor_range_deg", s.motor_range_deg),
        ];
        for (section, key, [lo, hi]) in ordered {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err((section, key, "needs [min, max] with min < max".into()));
            }
        }
        if !(0.5..=1.0).contains(&c.transition_ratio) {
            return Err((
                "controller",
                "transition_ratio",
                "must lie in [0.5, 1.0]".into(),
            ));
        }
        if self.run.repetitions == 0 {
            return Err(("run", "repetitions", "must be at least 1".into()));
        }
        Ok(())
    }

    /// Convert to the SI parameter set the harness runs on.
    pub fn harness_params(&self) -> Result<HarnessParams, String> {
        let mut h = HarnessParams::default();
        let g = &self.gripper;
        let gp = &mut h.plant.gripper;
        gp.proximal_length = g.proximal_length_mm / 1000.0;
        gp.distal_length = g.distal_length_mm / 1000.0;
        gp.link_capsule_radius = g.link_radius_mm / 1000.0;
        let half = g.base_spacing_mm / 2000.0;
        gp.finger_base_positions = [Vec2::new(-half, 0.0), Vec2::new(half, 0.0)];
        gp.joint_pulley_radius = g.joint_pulley_radius_mm / 1000.0;
        gp.restoring_stiffness = JointVector::splat(g.restoring_stiffness);
        let prox = g.proximal_limits_deg.map(f64::to_radians);
        let dist = g.distal_limits_deg.map(f64::to_radians);
        gp.joint_limits = [prox, dist, prox, dist];
        gp.restoring_rest_angle = JointVector::symmetric(prox[0], dist[0]);

        let s = &self.sea;
        let sp = &mut h.plant.sea;
        sp.spring_stiffness = s.spring_stiffness;
        sp.pulley_radius = s.pulley_radius_mm / 1000.0;
        sp.output_radius = s.output_radius_mm / 1000.0;
        sp.motor_max_speed = s.motor_max_speed_deg_s.to_radians();
        sp.motor_angle_range = s.motor_range_deg.map(f64::to_radians);
        sp.servo_time_constant = s.servo_time_constant;
        sp.pulley_position_gain = s.pulley_position_gain;

        let p = &self.physics;
        let ph = &mut h.plant.physics;
        ph.penalty.kn = p.contact_stiffness;
        ph.penalty.cn = p.contact_damping;
        ph.penalty.kt = p.tangential_stiffness;
        ph.penalty.ct = p.tangential_damping;
        ph.penalty.slip_velocity = p.slip_velocity;
        ph.joint_inertia = p.joint_inertia;
        ph.joint_damping = p.joint_damping;
        ph.object_linear_damping = p.object_linear_damping;
        ph.object_angular_damping = p.object_angular_damping;
        ph.object_mass = p.object_mass;
        ph.substep = p.substep;
        h.plant.control_period = p.control_period;
        h.plant.noise.angle_std = p.angle_noise_deg.to_radians();
        h.plant.noise.torque_std = p.torque_noise;

        let c = &self.controller;
        h.gains = GainSchedule { b: c.b, w: c.w };
        h.integrator_limit = c.integrator_limit;
        h.max_torques = JointVector::symmetric(c.proximal_torque, c.distal_torque);
        h.fixed_ratio_torque = c.fixed_ratio_torque;
        h.transition_ratio = c.transition_ratio;
        h.touch = TouchConfig {
            approach_torque: c.approach_torque,
            torque_factor: c.touch_torque_factor,
            speed_threshold: c.touch_speed_deg_s.to_radians(),
            hold_time: c.touch_hold_time,
        };

        let hs = &self.harness;
        h.approach_timeout = hs.approach_timeout;
        h.trial_timeout = hs.trial_timeout;
        h.transition_timeout = hs.transition_timeout;
        h.min_squeeze_time = hs.min_squeeze_time;
        h.settle = SettleThresholds {
            joint_speed: hs.settle_joint_speed_deg_s.to_radians(),
            object_speed: hs.settle_object_speed,
            object_angular_speed: hs.settle_object_angular_speed_deg_s.to_radians(),
            motor_speed: hs.settle_motor_speed_deg_s.to_radians(),
            window: hs.settle_window,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn jobs(&self) -> Option<usize> {
        (self.run.jobs > 0).then_some(self.run.jobs)
    }
}
