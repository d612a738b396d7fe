//! The actuated plant: four (or two) SEAs driving the gripper through rigid
//! tendons, stepped at the physics substep with a zero-order hold on the
//! actuator modes between control ticks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::contact::{MaterialPair, ObjectState};
use crate::mechanism::{
    joint_to_actuator_angle, joint_torques, observable_feedback, pulley_angles, GripperParams,
    JointVector, Observation, Transmission,
};
use crate::sea::{self, ControlMode, SeaParams, SeaState};
use crate::world::{
    step_world, GripperState, MotionSample, PhysicsParams, StepReport, WorldError, WorldState,
};

/// Zero-mean Gaussian noise on the proprioceptive readings. Both zero
/// (the default) leaves the readings exact and never touches the RNG.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorNoise {
    /// rad
    pub angle_std: f64,
    /// N·m
    pub torque_std: f64,
}

impl SensorNoise {
    pub fn is_off(&self) -> bool {
        self.angle_std == 0.0 && self.torque_std == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantParams {
    pub gripper: GripperParams,
    pub sea: SeaParams,
    pub physics: PhysicsParams,
    /// s
    pub control_period: f64,
    pub noise: SensorNoise,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            gripper: GripperParams::default(),
            sea: SeaParams::default(),
            physics: PhysicsParams::default(),
            control_period: 0.01,
            noise: SensorNoise::default(),
        }
    }
}

impl PlantParams {
    pub fn substeps_per_tick(&self) -> usize {
        (self.control_period / self.physics.substep)
            .round()
            .max(1.0) as usize
    }

    pub fn with_transmission(&self, transmission: Transmission) -> Self {
        let mut p = self.clone();
        p.gripper.transmission = transmission;
        p
    }
}

/// Extremes of the contact quantities over every substep so far.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsAudit {
    /// m
    pub max_penetration: f64,
    /// Largest `|ft| - mu fn` seen, N; negative infinity before any contact.
    pub max_cone_excess: f64,
    /// Smallest normal force over contacts seen, N; infinity before any contact.
    pub min_normal_force: f64,
}

impl Default for PhysicsAudit {
    fn default() -> Self {
        Self {
            max_penetration: 0.0,
            max_cone_excess: f64::NEG_INFINITY,
            min_normal_force: f64::INFINITY,
        }
    }
}

impl PhysicsAudit {
    fn absorb(&mut self, report: &StepReport, had_contacts: bool) {
        self.max_penetration = self.max_penetration.max(report.max_depth);
        if had_contacts {
            self.max_cone_excess = self.max_cone_excess.max(report.max_cone_excess);
            self.min_normal_force = self.min_normal_force.min(report.min_normal_force);
        }
    }
}

pub struct Plant {
    pub params: PlantParams,
    pub pair: MaterialPair,
    pub world: WorldState,
    pub audit: PhysicsAudit,
    pub last_report: StepReport,
    rng: Option<ChaCha8Rng>,
    last_motor: Vec<f64>,
    motor_speed: f64,
}

impl Plant {
    /// Gripper at `joints`, at rest, with each tendon pre-tensioned just
    /// enough to hold the pose against the restoring springs.
    pub fn new(
        params: PlantParams,
        pair: MaterialPair,
        object: ObjectState,
        joints: JointVector,
        seed: u64,
    ) -> Self {
        let g = &params.gripper;
        let pulleys = pulley_angles(&joints, g, &params.sea);
        let spring = g.restoring_torques(&joints);
        let holding: Vec<f64> = match g.transmission {
            Transmission::FullyActuated => spring.iter().copied().collect(),
            Transmission::Underactuated { .. } => vec![spring[0], spring[2]],
        };
        let seas = pulleys
            .iter()
            .zip(holding)
            .map(|(&p, tau)| {
                let force = (tau / g.joint_pulley_radius).max(0.0);
                let motor = p - force / params.sea.force_per_rad();
                SeaState {
                    theta_motor: motor,
                    theta_pulley: p,
                    mode: ControlMode::MotorPosition(motor),
                    servo_target: motor,
                }
            })
            .collect::<Vec<_>>();
        let last_motor = seas.iter().map(|s| s.theta_motor).collect();
        let rng = (!params.noise.is_off()).then(|| ChaCha8Rng::seed_from_u64(seed));
        Self {
            world: WorldState {
                gripper: GripperState {
                    joints,
                    joint_velocities: JointVector::ZERO,
                },
                seas,
                object,
                contacts: vec![],
                time: 0.0,
            },
            params,
            pair,
            audit: PhysicsAudit::default(),
            last_report: StepReport::default(),
            rng,
            last_motor,
            motor_speed: 0.0,
        }
    }

    pub fn time(&self) -> f64 {
        self.world.time
    }

    pub fn joints(&self) -> JointVector {
        self.world.gripper.joints
    }

    pub fn set_modes(&mut self, modes: &[ControlMode]) {
        assert_eq!(modes.len(), self.world.seas.len());
        for (s, m) in self.world.seas.iter_mut().zip(modes) {
            s.switch_mode(*m);
        }
    }

    /// Motor position command expressed in joint units.
    pub fn motor_position_mode(&self, joint_command: f64) -> ControlMode {
        ControlMode::MotorPosition(joint_to_actuator_angle(
            joint_command,
            &self.params.gripper,
            &self.params.sea,
        ))
    }

    /// Pulley position setpoint expressed as a joint angle.
    pub fn hold_joint_mode(&self, joint_angle: f64) -> ControlMode {
        ControlMode::PulleyPosition(joint_to_actuator_angle(
            joint_angle,
            &self.params.gripper,
            &self.params.sea,
        ))
    }

    /// Proprioceptive readings, with noise when configured.
    pub fn observe(&mut self) -> Observation {
        let p = &self.params;
        let mut obs = observable_feedback(&self.world.seas, &p.gripper, &p.sea);
        if let Some(rng) = self.rng.as_mut() {
            let angle = Normal::new(0.0, p.noise.angle_std).expect("validated noise");
            let torque = Normal::new(0.0, p.noise.torque_std).expect("validated noise");
            match &mut obs {
                Observation::Full(y) => {
                    for i in 0..4 {
                        y.measured_angles[i] += angle.sample(rng);
                        y.measured_torques[i] += torque.sample(rng);
                    }
                }
                Observation::Partial(y) => {
                    for f in 0..2 {
                        y.proximal_torques[f] += torque.sample(rng);
                        y.tendon_angles[f] += angle.sample(rng);
                    }
                }
            }
        }
        obs
    }

    /// Advance one control period.
    pub fn tick(&mut self) -> Result<(), WorldError> {
        let n = self.params.substeps_per_tick();
        let dt = self.params.physics.substep;
        for _ in 0..n {
            self.substep(dt)?;
        }
        let period = n as f64 * dt;
        let scale = self.params.sea.pulley_radius / self.params.gripper.joint_pulley_radius;
        self.motor_speed = self
            .world
            .seas
            .iter()
            .zip(&self.last_motor)
            .map(|(s, prev)| ((s.theta_motor - prev) / period).abs() * scale)
            .fold(0.0, f64::max);
        self.last_motor = self.world.seas.iter().map(|s| s.theta_motor).collect();
        Ok(())
    }

    fn substep(&mut self, dt: f64) -> Result<(), WorldError> {
        let p = &self.params;
        for s in self.world.seas.iter_mut() {
            let cmd = sea::mode_step(s, &p.sea).unwrap_or(s.theta_motor);
            *s = sea::servo_step(cmd, s, &p.sea, dt);
        }
        let forces: Vec<f64> = self
            .world
            .seas
            .iter()
            .map(|s| sea::tendon_force(s, &p.sea).force)
            .collect();
        let actuation = joint_torques(&forces, &self.world.gripper.joints, &p.gripper);
        let (mut next, report) = step_world(
            &self.world,
            &actuation,
            &p.gripper,
            &p.physics,
            &self.pair,
            dt,
        )?;
        for (s, angle) in
            next.seas
                .iter_mut()
                .zip(pulley_angles(&next.gripper.joints, &p.gripper, &p.sea))
        {
            s.theta_pulley = angle;
        }
        self.audit.absorb(&report, !next.contacts.is_empty());
        self.last_report = report;
        self.world = next;
        Ok(())
    }

    /// Velocities for the settle detector, taken at the last tick.
    pub fn motion_sample(&self) -> MotionSample {
        let o = &self.world.object;
        MotionSample {
            time: self.world.time,
            joint_velocities: self.world.gripper.joint_velocities,
            object_speed: o.speed(),
            object_angular_speed: o.velocity.omega.abs(),
            motor_speed: self.motor_speed,
        }
    }
}
