//! Fixed-step planar world: fingers, actuators and one free object on a
//! frictionless table.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::{
    contact_force, detect_contacts, net_wrench, palm_penetrations, Contact, MaterialPair,
    ObjectState, PenaltyParams, Wrench,
};
use crate::geometry::{cross, Vec2};
use crate::mechanism::{
    contact_joint_torques, forward_kinematics, point_jacobian, GripperParams, JointVector, LinkId,
};
use crate::sea::SeaState;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GripperState {
    pub joints: JointVector,
    pub joint_velocities: JointVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsParams {
    pub penalty: PenaltyParams,
    /// Lumped inertia per joint, kg·m².
    pub joint_inertia: f64,
    /// Viscous joint damping, N·m·s/rad.
    pub joint_damping: f64,
    /// Object-table viscous damping, N·s/m. The table itself is frictionless.
    pub object_linear_damping: f64,
    /// N·m·s/rad
    pub object_angular_damping: f64,
    pub object_mass: f64,
    /// Physics substep, s.
    pub substep: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            penalty: PenaltyParams::default(),
            joint_inertia: 5e-4,
            joint_damping: 0.02,
            object_linear_damping: 0.5,
            object_angular_damping: 0.001,
            object_mass: 0.1,
            substep: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub gripper: GripperState,
    pub seas: Vec<SeaState>,
    pub object: ObjectState,
    pub contacts: Vec<Contact>,
    pub time: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("simulation diverged at t = {time} s")]
    Diverged { time: f64 },
}

/// Per-step diagnostics gathered while integrating.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub max_depth: f64,
    /// Largest `|ft| - mu * fn` over contacts; non-positive inside the cone,
    /// negative infinity without contacts.
    pub max_cone_excess: f64,
    pub min_normal_force: f64,
    pub wrench: Wrench,
    /// Actuation plus contact torque per joint, before limits.
    pub net_joint_torque: JointVector,
    /// Contact torque per joint.
    pub contact_torque: JointVector,
}

/// Advance one substep with the given actuation torques (tendon flexion
/// minus restoring springs). Contacts are re-detected from the current
/// geometry and friction state carries over per link.
pub fn step_world(
    world: &WorldState,
    actuation: &JointVector,
    gripper: &GripperParams,
    physics: &PhysicsParams,
    pair: &MaterialPair,
    dt: f64,
) -> Result<(WorldState, StepReport), WorldError> {
    let joints = world.gripper.joints;
    let qd = world.gripper.joint_velocities;
    let capsules = forward_kinematics(gripper, &joints);
    let object = &world.object;
    let center = object.pose.position();

    let mut contacts = detect_contacts(&capsules, object);
    let mut report = StepReport {
        min_normal_force: f64::INFINITY,
        max_cone_excess: f64::NEG_INFINITY,
        ..StepReport::default()
    };
    let mut loads: Vec<(LinkId, Vec2, Vec2)> = Vec::with_capacity(contacts.len());
    for c in contacts.iter_mut() {
        if let Some(prev) = world
            .contacts
            .iter()
            .find(|p| p.link == c.link && p.feature == c.feature)
        {
            c.tangential_displacement = prev.tangential_displacement;
        }
        let finger = c.link.finger();
        let link_velocity = [finger.proximal(), finger.distal()]
            .iter()
            .fold(Vec2::zeros(), |v, &j| {
                v + point_jacobian(finger, &capsules, c.link, j, &c.point) * qd[j]
            });
        let relative = object.velocity.point_velocity(&center, &c.point) - link_velocity;
        let f = contact_force(c, &relative, pair, &physics.penalty, dt);
        c.normal_force = f.normal_force;
        c.tangential_force = f.tangential_force;
        c.tangential_displacement = f.tangential_displacement;
        c.tangential_state = f.state;
        loads.push((c.link, c.point, -c.force_on_object()));

        report.max_depth = report.max_depth.max(c.depth);
        report.max_cone_excess = report
            .max_cone_excess
            .max(f.tangential_force.abs() - pair.mu * f.normal_force);
        report.min_normal_force = report.min_normal_force.min(f.normal_force);
    }
    if contacts.is_empty() {
        report.min_normal_force = 0.0;
    }
    let mut wrench = net_wrench(object, &contacts);
    let palm_y = gripper.palm_center().y;
    for (point, depth) in palm_penetrations(object, palm_y) {
        let vy = object.velocity.point_velocity(&center, &point).y;
        let fy = physics.penalty.kn * depth + physics.penalty.cn * (-vy).max(0.0);
        wrench.fy += fy;
        wrench.torque += cross(&(point - center), &Vec2::new(0.0, fy));
        report.max_depth = report.max_depth.max(depth);
    }
    report.wrench = wrench;
    let contact_torque = contact_joint_torques(&capsules, loads);
    report.contact_torque = contact_torque;
    let net = *actuation + contact_torque;
    report.net_joint_torque = net;

    // Semi-implicit Euler; viscous damping handled implicitly.
    let inertia = physics.joint_inertia;
    let damp = 1.0 + dt * physics.joint_damping / inertia;
    let mut next_q = joints;
    let mut next_qd = qd;
    for i in 0..4 {
        let mut v = (qd[i] + dt * net[i] / inertia) / damp;
        let mut q = joints[i] + dt * v;
        let [lo, hi] = gripper.limit(i);
        if q >= hi {
            q = hi;
            v = v.min(0.0);
        } else if q <= lo {
            q = lo;
            v = v.max(0.0);
        }
        next_q[i] = q;
        next_qd[i] = v;
    }

    let m = object.mass;
    let lin_damp = 1.0 + dt * physics.object_linear_damping / m;
    let ang_damp = 1.0 + dt * physics.object_angular_damping / object.inertia;
    let mut next_obj = *object;
    next_obj.velocity.vx = (object.velocity.vx + dt * wrench.fx / m) / lin_damp;
    next_obj.velocity.vy = (object.velocity.vy + dt * wrench.fy / m) / lin_damp;
    next_obj.velocity.omega =
        (object.velocity.omega + dt * wrench.torque / object.inertia) / ang_damp;
    next_obj.pose.x += dt * next_obj.velocity.vx;
    next_obj.pose.y += dt * next_obj.velocity.vy;
    next_obj.pose.heading += dt * next_obj.velocity.omega;

    let time = world.time + dt;
    let finite = next_q.is_finite()
        && next_qd.is_finite()
        && [next_obj.pose.x, next_obj.pose.y, next_obj.pose.heading]
            .iter()
            .all(|v| v.is_finite())
        && [
            next_obj.velocity.vx,
            next_obj.velocity.vy,
            next_obj.velocity.omega,
        ]
        .iter()
        .all(|v| v.is_finite());
    if !finite {
        return Err(WorldError::Diverged { time });
    }

    Ok((
        WorldState {
            gripper: GripperState {
                joints: next_q,
                joint_velocities: next_qd,
            },
            seas: world.seas.clone(),
            object: next_obj,
            contacts,
            time,
        },
        report,
    ))
}

/// Velocity snapshot used by the settle detector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotionSample {
    pub time: f64,
    pub joint_velocities: JointVector,
    pub object_speed: f64,
    pub object_angular_speed: f64,
    /// Largest actuator motor speed, rad/s.
    pub motor_speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettleThresholds {
    /// rad/s
    pub joint_speed: f64,
    /// m/s
    pub object_speed: f64,
    /// rad/s
    pub object_angular_speed: f64,
    /// rad/s
    pub motor_speed: f64,
    /// Window length, s.
    pub window: f64,
}

impl Default for SettleThresholds {
    fn default() -> Self {
        Self {
            joint_speed: 0.5f64.to_radians(),
            object_speed: 0.001,
            object_angular_speed: 0.5f64.to_radians(),
            motor_speed: 0.5f64.to_radians(),
            window: 0.5,
        }
    }
}

impl MotionSample {
    pub fn is_quiet(&self, limits: &SettleThresholds) -> bool {
        self.joint_velocities
            .iter()
            .all(|v| v.abs() < limits.joint_speed)
            && self.object_speed < limits.object_speed
            && self.object_angular_speed < limits.object_angular_speed
            && self.motor_speed < limits.motor_speed
    }
}

/// True when every sample within the trailing window is quiet. History
/// shorter than the window never counts as settled.
pub fn is_settled(history: &[MotionSample], limits: &SettleThresholds) -> bool {
    let Some(last) = history.last() else {
        return false;
    };
    let first = history.first().expect("non-empty");
    if last.time - first.time < limits.window - 1e-9 {
        return false;
    }
    history
        .iter()
        .rev()
        .take_while(|s| last.time - s.time <= limits.window + 1e-9)
        .all(|s| s.is_quiet(limits))
}
