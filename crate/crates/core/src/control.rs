//! Grasp controllers working purely in proprioceptive space: the MIMO PI
//! grasping controller, the fixed torque ratio controller, and touch
//! detection for the approach phase.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mechanism::{FeedbackVector, JointVector};

pub type Matrix4x8 = SMatrix<f64, 4, 8>;
pub type Vector8 = SVector<f64, 8>;
pub type Vector4 = SVector<f64, 4>;

#[derive(Debug, Error, PartialEq)]
pub enum ControlError {
    #[error("non-finite feedback")]
    NonFiniteFeedback,
    #[error("controller step requested in phase {0:?}")]
    WrongPhase(Phase),
    #[error("invalid controller setting: {0}")]
    Invalid(&'static str),
}

/// Baselines `b1..b6` and weights `w1..w4` from which every MIMO gain is
/// formed as a product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSchedule {
    pub b: [f64; 6],
    pub w: [f64; 4],
}

impl Default for GainSchedule {
    fn default() -> Self {
        Self {
            b: [0.2, 0.5, 4.0, 8.0, 1.0, 1.0],
            w: [1.0, 0.3, 1.0, 0.5],
        }
    }
}

impl GainSchedule {
    pub fn is_finite(&self) -> bool {
        self.b.iter().chain(self.w.iter()).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainMatrices {
    pub feedforward: Matrix4x8,
    pub kp: Matrix4x8,
    pub ki: Matrix4x8,
}

/// Feedforward `[I | 0]`; proportional gains over angle and torque errors;
/// integral gains over angle errors only. Within each 4x4 block the
/// diagonal uses the "own joint" weight and off-diagonals the coupling
/// weight, with the baseline chosen by whether the column is proximal or
/// distal.
pub fn build_gain_matrices(schedule: &GainSchedule) -> GainMatrices {
    let [b1, b2, b3, b4, b5, b6] = schedule.b;
    let [w1, w2, w3, w4] = schedule.w;
    let block = |diag_w: f64, off_w: f64, prox_b: f64, dist_b: f64| {
        SMatrix::<f64, 4, 4>::from_fn(|row, col| {
            let base = if col % 2 == 0 { prox_b } else { dist_b };
            let weight = if row == col { diag_w } else { off_w };
            weight * base
        })
    };
    let mut feedforward = Matrix4x8::zeros();
    feedforward
        .fixed_view_mut::<4, 4>(0, 0)
        .copy_from(&SMatrix::<f64, 4, 4>::identity());
    let mut kp = Matrix4x8::zeros();
    kp.fixed_view_mut::<4, 4>(0, 0)
        .copy_from(&block(w1, w2, b1, b2));
    kp.fixed_view_mut::<4, 4>(0, 4)
        .copy_from(&block(w3, w4, b3, b4));
    let mut ki = Matrix4x8::zeros();
    ki.fixed_view_mut::<4, 4>(0, 0)
        .copy_from(&block(w1, w2, b5, b6));
    GainMatrices {
        feedforward,
        kp,
        ki,
    }
}

/// The 8D reference: desired joint angles then reference joint torques.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReferenceVector {
    pub desired_angles: JointVector,
    pub reference_torques: JointVector,
}

impl ReferenceVector {
    pub fn as_vector(&self) -> Vector8 {
        stack(&self.desired_angles, &self.reference_torques)
    }

    pub fn swap_fingers(&self) -> Self {
        Self {
            desired_angles: self.desired_angles.swap_fingers(),
            reference_torques: self.reference_torques.swap_fingers(),
        }
    }
}

fn stack(a: &JointVector, b: &JointVector) -> Vector8 {
    Vector8::from_iterator(a.iter().chain(b.iter()).copied())
}

fn feedback_vector(y: &FeedbackVector) -> Vector8 {
    stack(&y.measured_angles, &y.measured_torques)
}

/// Angle setpoints copy the touch configuration; torque references are the
/// configured maxima.
pub fn make_reference(touch_snapshot: &JointVector, max_torques: &JointVector) -> ReferenceVector {
    ReferenceVector {
        desired_angles: *touch_snapshot,
        reference_torques: *max_torques,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Approach,
    Squeeze,
    Transitioned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    /// Accumulated angle error, rad·s.
    pub integrator: JointVector,
    pub phase: Phase,
    pub touch_snapshot: Option<JointVector>,
}

impl Default for ControllerState {
    fn default() -> Self {
        Self {
            integrator: JointVector::ZERO,
            phase: Phase::Approach,
            touch_snapshot: None,
        }
    }
}

impl ControllerState {
    /// Enter the squeeze phase from a recorded touch.
    pub fn squeezing(touch: JointVector) -> Self {
        Self {
            integrator: JointVector::ZERO,
            phase: Phase::Squeeze,
            touch_snapshot: Some(touch),
        }
    }
}

/// Matrix-vector product where each row sums its own finger's columns
/// before the other finger's, so swapping the fingers permutes the result
/// bit for bit.
fn finger_ordered(m: &Matrix4x8, v: &Vector8) -> Vector4 {
    Vector4::from_fn(|i, _| {
        let own = i / 2;
        let mut acc = 0.0;
        for block in [0, 4] {
            for f in [own, 1 - own] {
                for k in 0..2 {
                    let j = block + 2 * f + k;
                    acc += m[(i, j)] * v[j];
                }
            }
        }
        acc
    })
}

/// One MIMO PI update. Returns joint-space motor position commands and the
/// next controller state; the integrator only accumulates angle errors and
/// is clamped to `±integrator_limit` per channel.
pub fn mimo_step(
    u: &ReferenceVector,
    y: &FeedbackVector,
    state: &ControllerState,
    gains: &GainMatrices,
    dt: f64,
    integrator_limit: f64,
) -> Result<(JointVector, ControllerState), ControlError> {
    if state.phase != Phase::Squeeze {
        return Err(ControlError::WrongPhase(state.phase));
    }
    if !y.is_finite() {
        return Err(ControlError::NonFiniteFeedback);
    }
    let e = u.as_vector() - feedback_vector(y);
    let integrator = JointVector(std::array::from_fn(|i| {
        (state.integrator[i] + e[i] * dt).clamp(-integrator_limit, integrator_limit)
    }));
    let padded = stack(&integrator, &JointVector::ZERO);
    let c = finger_ordered(&gains.feedforward, &u.as_vector())
        + finger_ordered(&gains.kp, &e)
        + finger_ordered(&gains.ki, &padded);
    let next = ControllerState {
        integrator,
        ..*state
    };
    Ok((JointVector([c[0], c[1], c[2], c[3]]), next))
}

/// Joint torque setpoints emulating an underactuated finger whose distal
/// joint always gets `ratio` times the proximal torque.
pub fn fixed_ratio_step(proximal_ref: f64, ratio: f64) -> Result<JointVector, ControlError> {
    if !(proximal_ref >= 0.0) {
        return Err(ControlError::Invalid(
            "proximal torque reference must be >= 0",
        ));
    }
    if !(ratio > 0.0) {
        return Err(ControlError::Invalid("torque ratio must be > 0"));
    }
    Ok(JointVector::symmetric(proximal_ref, ratio * proximal_ref))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TouchConfig {
    /// Low torque reference closing the proximal joints, N·m.
    pub approach_torque: f64,
    /// Measured torque must exceed this multiple of the free-motion baseline.
    pub torque_factor: f64,
    /// rad/s
    pub speed_threshold: f64,
    /// How long both conditions must hold, s.
    pub hold_time: f64,
}

impl Default for TouchConfig {
    fn default() -> Self {
        Self {
            approach_torque: 0.02,
            torque_factor: 2.0,
            speed_threshold: 1f64.to_radians(),
            hold_time: 0.05,
        }
    }
}

/// Per-finger touch latch for the approach phase.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TouchDetector {
    held_for: [f64; 2],
    latched: [bool; 2],
}

impl TouchDetector {
    /// Feed one control period of proximal readings. `baseline` is the
    /// torque the finger needs in free motion at its current pose (its own
    /// restoring spring). Returns true once both fingers have latched.
    pub fn update(
        &mut self,
        config: &TouchConfig,
        proximal_torque: [f64; 2],
        baseline: [f64; 2],
        proximal_speed: [f64; 2],
        dt: f64,
    ) -> bool {
        for f in 0..2 {
            if self.latched[f] {
                continue;
            }
            let loaded = proximal_torque[f] > config.torque_factor * baseline[f].max(0.0);
            let stopped = proximal_speed[f].abs() < config.speed_threshold;
            if loaded && stopped {
                self.held_for[f] += dt;
                if self.held_for[f] >= config.hold_time - 1e-12 {
                    self.latched[f] = true;
                }
            } else {
                self.held_for[f] = 0.0;
            }
        }
        self.touched()
    }

    pub fn latched(&self) -> [bool; 2] {
        self.latched
    }

    pub fn touched(&self) -> bool {
        self.latched[0] && self.latched[1]
    }
}
