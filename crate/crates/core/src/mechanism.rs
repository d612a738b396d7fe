//! Two-finger, two-link gripper: kinematics, tendon-to-joint torque mapping
//! and what the actuators let a controller observe.
//!
//! Finger 1 sits at the lower-x base and flexes toward +x; finger 2 is its
//! mirror image. Joint angles are measured from the palm normal (+y), so an
//! all-zero configuration has both fingers straight and parallel.
//!
//! Flexing a joint winds tendon onto its actuator pulley, which turns the
//! pulley negatively in the actuator frame: `theta_pulley = -theta_joint *
//! R_joint / R_pulley`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Capsule, Vec2};
use crate::sea::{self, SeaParams, SeaState};

pub const P1: usize = 0;
pub const D1: usize = 1;
pub const P2: usize = 2;
pub const D2: usize = 3;

/// Four per-joint values in the canonical order (proximal 1, distal 1,
/// proximal 2, distal 2). Angles in rad or torques in N·m.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointVector(pub [f64; 4]);

impl JointVector {
    pub const ZERO: JointVector = JointVector([0.0; 4]);

    pub fn new(p1: f64, d1: f64, p2: f64, d2: f64) -> Self {
        Self([p1, d1, p2, d2])
    }

    /// Same proximal/distal pair on both fingers.
    pub fn symmetric(proximal: f64, distal: f64) -> Self {
        Self([proximal, distal, proximal, distal])
    }

    pub fn splat(v: f64) -> Self {
        Self([v; 4])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Exchange the two fingers' entries.
    pub fn swap_fingers(&self) -> Self {
        let [p1, d1, p2, d2] = self.0;
        Self([p2, d2, p1, d1])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.map(f))
    }

    pub fn to_degrees(&self) -> Self {
        self.map(f64::to_degrees)
    }

    pub fn to_radians(&self) -> Self {
        self.map(f64::to_radians)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }
}

impl Index<usize> for JointVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for JointVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for JointVector {
    type Output = JointVector;
    fn add(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for JointVector {
    type Output = JointVector;
    fn sub(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Mul<f64> for JointVector {
    type Output = JointVector;
    fn mul(self, rhs: f64) -> Self {
        self.map(|v| v * rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Finger {
    First,
    Second,
}

impl Finger {
    pub const BOTH: [Finger; 2] = [Finger::First, Finger::Second];

    pub fn index(self) -> usize {
        match self {
            Finger::First => 0,
            Finger::Second => 1,
        }
    }

    /// Flexion direction along x.
    pub fn flex_sign(self) -> f64 {
        match self {
            Finger::First => 1.0,
            Finger::Second => -1.0,
        }
    }

    pub fn proximal(self) -> usize {
        2 * self.index()
    }

    pub fn distal(self) -> usize {
        2 * self.index() + 1
    }
}

/// Identifies one link; its index matches the joint that drives it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkId(pub usize);

impl LinkId {
    pub const ALL: [LinkId; 4] = [LinkId(P1), LinkId(D1), LinkId(P2), LinkId(D2)];

    pub fn finger(self) -> Finger {
        if self.0 < 2 {
            Finger::First
        } else {
            Finger::Second
        }
    }

    pub fn is_proximal(self) -> bool {
        self.0 % 2 == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Transmission {
    /// One actuator per joint.
    FullyActuated,
    /// One actuator per finger; a single tendon wraps both joint pulleys and
    /// the distal pulley is `distal_to_proximal_ratio` times the proximal one.
    Underactuated { distal_to_proximal_ratio: f64 },
}

impl Transmission {
    pub fn actuator_count(&self) -> usize {
        match self {
            Transmission::FullyActuated => 4,
            Transmission::Underactuated { .. } => 2,
        }
    }

    pub fn exposes_joint_angles(&self) -> bool {
        matches!(self, Transmission::FullyActuated)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MechanismError {
    #[error("invalid gripper parameter: {0}")]
    InvalidParams(&'static str),
    #[error("{0} is not observable with this transmission")]
    Masked(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GripperParams {
    pub proximal_length: f64,
    pub distal_length: f64,
    pub link_capsule_radius: f64,
    pub finger_base_positions: [Vec2; 2],
    /// Flexion moment arm of the tendon at each joint pulley, m.
    pub joint_pulley_radius: f64,
    pub restoring_stiffness: JointVector,
    pub restoring_rest_angle: JointVector,
    /// `[min, max]` per joint, rad.
    pub joint_limits: [[f64; 2]; 4],
    pub transmission: Transmission,
}

impl Default for GripperParams {
    fn default() -> Self {
        let proximal = [-40f64.to_radians(), 100f64.to_radians()];
        let distal = [-20f64.to_radians(), 110f64.to_radians()];
        Self {
            proximal_length: 0.082,
            distal_length: 0.075,
            link_capsule_radius: 0.008,
            finger_base_positions: [Vec2::new(-0.044, 0.0), Vec2::new(0.044, 0.0)],
            joint_pulley_radius: 0.010,
            restoring_stiffness: JointVector::splat(0.01),
            restoring_rest_angle: JointVector::symmetric(proximal[0], distal[0]),
            joint_limits: [proximal, distal, proximal, distal],
            transmission: Transmission::FullyActuated,
        }
    }
}

impl GripperParams {
    pub fn validate(&self) -> Result<(), MechanismError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.proximal_length) || !pos(self.distal_length) {
            return Err(MechanismError::InvalidParams("link lengths must be > 0"));
        }
        if !pos(self.link_capsule_radius) {
            return Err(MechanismError::InvalidParams(
                "link_capsule_radius must be > 0",
            ));
        }
        if !pos(self.joint_pulley_radius) {
            return Err(MechanismError::InvalidParams(
                "joint_pulley_radius must be > 0",
            ));
        }
        let [b1, b2] = self.finger_base_positions;
        if !(b1.x < b2.x) {
            return Err(MechanismError::InvalidParams(
                "finger 1 base must lie at lower x than finger 2 base",
            ));
        }
        for [lo, hi] in self.joint_limits {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(MechanismError::InvalidParams("joint limit needs min < max"));
            }
        }
        if self
            .restoring_stiffness
            .iter()
            .any(|k| !k.is_finite() || *k < 0.0)
        {
            return Err(MechanismError::InvalidParams(
                "restoring stiffness must be >= 0",
            ));
        }
        if let Transmission::Underactuated {
            distal_to_proximal_ratio,
        } = self.transmission
        {
            if !pos(distal_to_proximal_ratio) {
                return Err(MechanismError::InvalidParams(
                    "underactuated ratio must be > 0",
                ));
            }
        }
        Ok(())
    }

    pub fn limit(&self, joint: usize) -> [f64; 2] {
        self.joint_limits[joint]
    }

    pub fn lower_limits(&self) -> JointVector {
        JointVector(std::array::from_fn(|i| self.joint_limits[i][0]))
    }

    pub fn clamp_to_limits(&self, joints: &JointVector) -> JointVector {
        JointVector(std::array::from_fn(|i| {
            joints[i].clamp(self.joint_limits[i][0], self.joint_limits[i][1])
        }))
    }

    pub fn restoring_torques(&self, joints: &JointVector) -> JointVector {
        JointVector(std::array::from_fn(|i| {
            self.restoring_stiffness[i] * (joints[i] - self.restoring_rest_angle[i])
        }))
    }

    pub fn palm_center(&self) -> Vec2 {
        (self.finger_base_positions[0] + self.finger_base_positions[1]) * 0.5
    }
}

/// Unit direction of a link whose absolute flexion is `angle`.
pub fn link_direction(finger: Finger, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(finger.flex_sign() * s, c)
}

/// Capsules for (proximal 1, distal 1, proximal 2, distal 2).
pub fn forward_kinematics(params: &GripperParams, joints: &JointVector) -> [Capsule; 4] {
    let mut out = [Capsule {
        a: Vec2::zeros(),
        b: Vec2::zeros(),
        radius: 0.0,
    }; 4];
    for finger in Finger::BOTH {
        let base = params.finger_base_positions[finger.index()];
        let tp = joints[finger.proximal()];
        let td = joints[finger.distal()];
        let knuckle = base + link_direction(finger, tp) * params.proximal_length;
        let tip = knuckle + link_direction(finger, tp + td) * params.distal_length;
        out[finger.proximal()] = Capsule {
            a: base,
            b: knuckle,
            radius: params.link_capsule_radius,
        };
        out[finger.distal()] = Capsule {
            a: knuckle,
            b: tip,
            radius: params.link_capsule_radius,
        };
    }
    out
}

/// Velocity of `point` rigidly attached to `link` per unit rate of `joint`.
/// Zero when the joint is not upstream of the link.
pub fn point_jacobian(
    finger: Finger,
    capsules: &[Capsule; 4],
    link: LinkId,
    joint: usize,
    point: &Vec2,
) -> Vec2 {
    if LinkId(joint).finger() != link.finger() {
        return Vec2::zeros();
    }
    let is_proximal_joint = joint % 2 == 0;
    if !is_proximal_joint && link.is_proximal() {
        return Vec2::zeros();
    }
    // Proximal capsules start at the base, distal capsules at the knuckle.
    let pivot = capsules[joint].a;
    let r = point - pivot;
    Vec2::new(r.y, -r.x) * finger.flex_sign()
}

/// Joint torques produced by forces applied at points on the links.
pub fn contact_joint_torques(
    capsules: &[Capsule; 4],
    loads: impl IntoIterator<Item = (LinkId, Vec2, Vec2)>,
) -> JointVector {
    let mut tau = JointVector::ZERO;
    for (link, point, force) in loads {
        let finger = link.finger();
        for joint in [finger.proximal(), finger.distal()] {
            tau[joint] += point_jacobian(finger, capsules, link, joint, &point).dot(&force);
        }
    }
    tau
}

/// Flexion torques delivered by the tendons before restoring springs.
/// `tendon_forces` holds one entry per actuator.
pub fn gross_tendon_torques(tendon_forces: &[f64], params: &GripperParams) -> JointVector {
    let r = params.joint_pulley_radius;
    match params.transmission {
        Transmission::FullyActuated => {
            assert_eq!(
                tendon_forces.len(),
                4,
                "fully actuated gripper has four tendons"
            );
            JointVector(std::array::from_fn(|i| tendon_forces[i] * r))
        }
        Transmission::Underactuated {
            distal_to_proximal_ratio,
        } => {
            assert_eq!(
                tendon_forces.len(),
                2,
                "underactuated gripper has two tendons"
            );
            let p1 = tendon_forces[0] * r;
            let p2 = tendon_forces[1] * r;
            JointVector([
                p1,
                distal_to_proximal_ratio * p1,
                p2,
                distal_to_proximal_ratio * p2,
            ])
        }
    }
}

/// Net actuation torque: tendon flexion minus restoring-spring extension.
pub fn joint_torques(
    tendon_forces: &[f64],
    joints: &JointVector,
    params: &GripperParams,
) -> JointVector {
    gross_tendon_torques(tendon_forces, params) - params.restoring_torques(joints)
}

/// Actuator pulley angles implied by the joint configuration.
pub fn pulley_angles(joints: &JointVector, params: &GripperParams, sea: &SeaParams) -> Vec<f64> {
    let scale = params.joint_pulley_radius / sea.pulley_radius;
    match params.transmission {
        Transmission::FullyActuated => joints.iter().map(|q| -q * scale).collect(),
        Transmission::Underactuated {
            distal_to_proximal_ratio,
        } => Finger::BOTH
            .iter()
            .map(|f| {
                let excursion =
                    joints[f.proximal()] + distal_to_proximal_ratio * joints[f.distal()];
                -excursion * scale
            })
            .collect(),
    }
}

/// Joint-space quantity (angle or motor position in joint units) to the
/// actuator frame, fully actuated map.
pub fn joint_to_actuator_angle(joint_angle: f64, params: &GripperParams, sea: &SeaParams) -> f64 {
    -joint_angle * params.joint_pulley_radius / sea.pulley_radius
}

pub fn actuator_to_joint_angle(
    actuator_angle: f64,
    params: &GripperParams,
    sea: &SeaParams,
) -> f64 {
    -actuator_angle * sea.pulley_radius / params.joint_pulley_radius
}

/// The 8D proprioceptive feedback of the fully actuated gripper.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeedbackVector {
    pub measured_angles: JointVector,
    pub measured_torques: JointVector,
}

impl FeedbackVector {
    pub fn as_array(&self) -> [f64; 8] {
        let a = self.measured_angles.0;
        let t = self.measured_torques.0;
        [a[0], a[1], a[2], a[3], t[0], t[1], t[2], t[3]]
    }

    pub fn swap_fingers(&self) -> Self {
        Self {
            measured_angles: self.measured_angles.swap_fingers(),
            measured_torques: self.measured_torques.swap_fingers(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.measured_angles.is_finite() && self.measured_torques.is_finite()
    }
}

/// What an underactuated gripper exposes: the proximal tendon torque and
/// the tendon (pulley) angle of each finger. Individual joint angles are
/// not recoverable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialFeedback {
    pub proximal_torques: [f64; 2],
    pub tendon_angles: [f64; 2],
    pub distal_to_proximal_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Observation {
    Full(FeedbackVector),
    Partial(PartialFeedback),
}

impl Observation {
    pub fn full(&self) -> Result<&FeedbackVector, MechanismError> {
        match self {
            Observation::Full(y) => Ok(y),
            Observation::Partial(_) => Err(MechanismError::Masked("full feedback vector")),
        }
    }

    pub fn joint_angles(&self) -> Result<JointVector, MechanismError> {
        match self {
            Observation::Full(y) => Ok(y.measured_angles),
            Observation::Partial(_) => Err(MechanismError::Masked("joint angles")),
        }
    }

    pub fn joint_torque(&self, joint: usize) -> Result<f64, MechanismError> {
        match self {
            Observation::Full(y) => Ok(y.measured_torques[joint]),
            Observation::Partial(p) if joint % 2 == 0 => Ok(p.proximal_torques[joint / 2]),
            Observation::Partial(_) => Err(MechanismError::Masked("distal joint torque")),
        }
    }

    pub fn proximal_torque(&self, finger: Finger) -> f64 {
        self.joint_torque(finger.proximal())
            .expect("proximal torque is always observable")
    }

    /// Flexion torques implied by the tendon readings. For the underactuated
    /// gripper the distal entries follow from the fixed pulley ratio.
    pub fn tendon_torque_vector(&self) -> JointVector {
        match self {
            Observation::Full(y) => y.measured_torques,
            Observation::Partial(p) => {
                let r = p.distal_to_proximal_ratio;
                let [t1, t2] = p.proximal_torques;
                JointVector([t1, r * t1, t2, r * t2])
            }
        }
    }
}

/// Proprioceptive readings from actuator encoders and spring deflections.
pub fn observable_feedback(
    seas: &[SeaState],
    params: &GripperParams,
    sea: &SeaParams,
) -> Observation {
    let torque = |s: &SeaState| sea::tendon_force(s, sea).force * params.joint_pulley_radius;
    match params.transmission {
        Transmission::FullyActuated => Observation::Full(FeedbackVector {
            measured_angles: JointVector(std::array::from_fn(|i| {
                actuator_to_joint_angle(seas[i].theta_pulley, params, sea)
            })),
            measured_torques: JointVector(std::array::from_fn(|i| torque(&seas[i]))),
        }),
        Transmission::Underactuated {
            distal_to_proximal_ratio,
        } => Observation::Partial(PartialFeedback {
            proximal_torques: [torque(&seas[0]), torque(&seas[1])],
            tendon_angles: [seas[0].theta_pulley, seas[1].theta_pulley],
            distal_to_proximal_ratio,
        }),
    }
}
