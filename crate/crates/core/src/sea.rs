//! Series elastic actuator: a position-driven servo, a torsion spring and a
//! tendon pulley.
//!
//! Angles here are in the actuator's own frame. Tendon tension is
//! `K * (theta_pulley - theta_motor) / R_pulley`, so pulling the tendon means
//! driving the motor *below* the pulley angle. The mechanism module maps joint
//! flexion onto this frame.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SeaError {
    #[error("torque setpoint {0} N·m is negative; tendons can only pull")]
    NegativeTorque(f64),
    #[error("invalid SEA parameter: {0}")]
    InvalidParams(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeaParams {
    /// Torsional spring stiffness, N·m/rad.
    pub spring_stiffness: f64,
    /// Radius of the SEA output pulley, m.
    pub pulley_radius: f64,
    /// Moment arm of the tendon at the joint it drives, m. Used to express
    /// torque-mode setpoints as joint torques.
    pub output_radius: f64,
    /// rad/s
    pub motor_max_speed: f64,
    /// rad, `[min, max]`
    pub motor_angle_range: [f64; 2],
    /// First-order lag of the servo's internal position loop, s. Zero gives
    /// an ideal rate-limited tracker.
    pub servo_time_constant: f64,
    /// Motor command per unit pulley-angle error in pulley-position mode.
    pub pulley_position_gain: f64,
}

impl Default for SeaParams {
    fn default() -> Self {
        Self {
            spring_stiffness: 1.0,
            pulley_radius: 0.01,
            output_radius: 0.01,
            motor_max_speed: 6.0,
            motor_angle_range: [-4.0, 4.0],
            servo_time_constant: 0.15,
            pulley_position_gain: 5.0,
        }
    }
}

impl SeaParams {
    pub fn validate(&self) -> Result<(), SeaError> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(self.spring_stiffness) {
            return Err(SeaError::InvalidParams("spring_stiffness must be > 0"));
        }
        if !finite_pos(self.pulley_radius) {
            return Err(SeaError::InvalidParams("pulley_radius must be > 0"));
        }
        if !finite_pos(self.output_radius) {
            return Err(SeaError::InvalidParams("output_radius must be > 0"));
        }
        if !finite_pos(self.motor_max_speed) {
            return Err(SeaError::InvalidParams("motor_max_speed must be > 0"));
        }
        let [lo, hi] = self.motor_angle_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SeaError::InvalidParams("motor_angle_range needs min < max"));
        }
        if !(self.servo_time_constant.is_finite() && self.servo_time_constant >= 0.0) {
            return Err(SeaError::InvalidParams("servo_time_constant must be >= 0"));
        }
        if !(self.pulley_position_gain.is_finite() && self.pulley_position_gain >= 0.0) {
            return Err(SeaError::InvalidParams("pulley_position_gain must be >= 0"));
        }
        Ok(())
    }

    /// Tendon force per radian of spring deflection, N/rad.
    pub fn force_per_rad(&self) -> f64 {
        self.spring_stiffness / self.pulley_radius
    }
}

/// SEA-level control mode with its setpoint. Exactly one is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ControlMode {
    /// Motor angle setpoint, rad.
    MotorPosition(f64),
    /// Pulley angle setpoint, rad.
    PulleyPosition(f64),
    /// Joint torque setpoint, N·m.
    Torque(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeaState {
    pub theta_motor: f64,
    pub theta_pulley: f64,
    pub mode: ControlMode,
    /// Internal target of the servo's lagged position loop.
    pub servo_target: f64,
}

impl SeaState {
    /// Unloaded actuator holding its motor where the pulley is.
    pub fn relaxed(theta_pulley: f64) -> Self {
        Self {
            theta_motor: theta_pulley,
            theta_pulley,
            mode: ControlMode::MotorPosition(theta_pulley),
            servo_target: theta_pulley,
        }
    }

    /// Switch control mode. The motor angle is untouched; only later
    /// commands differ.
    pub fn switch_mode(&mut self, mode: ControlMode) {
        self.mode = mode;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TendonForce {
    /// N, never negative.
    pub force: f64,
    pub slack: bool,
}

/// Raw spring-deflection force, possibly negative.
pub fn raw_tendon_force(state: &SeaState, params: &SeaParams) -> f64 {
    params.spring_stiffness * (state.theta_pulley - state.theta_motor) / params.pulley_radius
}

/// Tendon tension from spring deflection. Cables pull only, so a
/// non-positive deflection force reads as zero and flags slack.
pub fn tendon_force(state: &SeaState, params: &SeaParams) -> TendonForce {
    let raw = raw_tendon_force(state, params);
    if raw > 0.0 {
        TendonForce {
            force: raw,
            slack: false,
        }
    } else {
        TendonForce {
            force: 0.0,
            slack: true,
        }
    }
}

/// Rate-limited ideal position tracking of the motor.
pub fn step_motor(command: f64, state: &SeaState, params: &SeaParams, dt: f64) -> SeaState {
    debug_assert!(dt > 0.0);
    let [lo, hi] = params.motor_angle_range;
    let target = command.clamp(lo, hi);
    let max_step = params.motor_max_speed * dt;
    let delta = target - state.theta_motor;
    let theta_motor = if delta.abs() <= max_step {
        target
    } else {
        state.theta_motor + max_step.copysign(delta)
    };
    SeaState {
        theta_motor,
        ..*state
    }
}

/// Servo response to a held command: a first-order lag on the target
/// followed by rate-limited tracking.
pub fn servo_step(command: f64, state: &SeaState, params: &SeaParams, dt: f64) -> SeaState {
    let tc = params.servo_time_constant;
    let servo_target = if tc > 0.0 {
        state.servo_target + (command - state.servo_target) * (dt / (tc + dt))
    } else {
        command
    };
    let next = step_motor(servo_target, state, params, dt);
    SeaState {
        servo_target,
        ..next
    }
}

/// Motor command realising the active mode.
pub fn mode_step(state: &SeaState, params: &SeaParams) -> Result<f64, SeaError> {
    match state.mode {
        ControlMode::MotorPosition(setpoint) => Ok(setpoint),
        ControlMode::Torque(torque) => {
            if torque < 0.0 {
                return Err(SeaError::NegativeTorque(torque));
            }
            let force = torque / params.output_radius;
            Ok(state.theta_pulley - force / params.force_per_rad())
        }
        ControlMode::PulleyPosition(setpoint) => {
            Ok(setpoint + params.pulley_position_gain * (setpoint - state.theta_pulley))
        }
    }
}
