use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{ControllerKind, SpecError, SqueezeController, TrialSpec};
use crate::contact::{ObjectState, TangentialState, Wrench};
use crate::control::{
    build_gain_matrices, fixed_ratio_step, make_reference, mimo_step, ControlError,
    ControllerState, GainSchedule, TouchConfig, TouchDetector,
};
use crate::mechanism::{
    actuator_to_joint_angle, Finger, GripperParams, JointVector, Observation, Transmission,
};
use crate::plant::{Plant, PlantParams};
use crate::sea::ControlMode;
use crate::world::{is_settled, MotionSample, SettleThresholds, WorldError, WorldState};

/// Everything a trial needs besides its spec.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessParams {
    pub plant: PlantParams,
    pub gains: GainSchedule,
    /// Per-channel clamp on the angle-error integral, rad·s.
    pub integrator_limit: f64,
    /// MIMO torque references, N·m.
    pub max_torques: JointVector,
    pub touch: TouchConfig,
    pub settle: SettleThresholds,
    /// Squeeze time before the settle detector may fire, s.
    pub min_squeeze_time: f64,
    pub approach_timeout: f64,
    /// Budget for the squeeze phase, s.
    pub trial_timeout: f64,
    /// Budget for the slower fingertip-to-enveloping reconfiguration, s.
    pub transition_timeout: f64,
    /// Proximal torque for the fixed ratio and underactuated squeezes, N·m.
    pub fixed_ratio_torque: f64,
    pub transition_ratio: f64,
    /// Object center band, m.
    pub workspace_x: [f64; 2],
    pub workspace_y: [f64; 2],
    /// rad
    pub limit_tolerance: f64,
}

impl Default for HarnessParams {
    fn default() -> Self {
        Self {
            plant: PlantParams::default(),
            gains: GainSchedule::default(),
            integrator_limit: 1.0,
            max_torques: JointVector::symmetric(0.4, 0.2),
            touch: TouchConfig::default(),
            settle: SettleThresholds::default(),
            min_squeeze_time: 1.0,
            approach_timeout: 15.0,
            trial_timeout: 20.0,
            transition_timeout: 40.0,
            fixed_ratio_torque: 0.4,
            transition_ratio: 0.5,
            workspace_x: [-0.150, 0.150],
            workspace_y: [0.010, 0.200],
            limit_tolerance: 0.5f64.to_radians(),
        }
    }
}

impl HarnessParams {
    pub fn validate(&self) -> Result<(), String> {
        self.plant.gripper.validate().map_err(|e| e.to_string())?;
        self.plant.sea.validate().map_err(|e| e.to_string())?;
        if !self.gains.is_finite() {
            return Err("gain schedule must be finite".into());
        }
        if !(0.5..=1.0).contains(&self.transition_ratio) {
            return Err("transition ratio must lie in [0.5, 1.0]".into());
        }
        if self
            .max_torques
            .iter()
            .any(|t| !(t.is_finite() && *t >= 0.0))
        {
            return Err("torque references must be >= 0".into());
        }
        let positive = [
            ("control period", self.plant.control_period),
            ("substep", self.plant.physics.substep),
            ("joint inertia", self.plant.physics.joint_inertia),
            ("object mass", self.plant.physics.object_mass),
            ("trial timeout", self.trial_timeout),
            ("transition timeout", self.transition_timeout),
            ("approach timeout", self.approach_timeout),
            ("settle window", self.settle.window),
            ("integrator limit", self.integrator_limit),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be > 0"));
            }
        }
        if self.plant.control_period < self.plant.physics.substep {
            return Err("control period must not be shorter than the physics substep".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    FingertipStable,
    Enveloped,
    JointLimited,
    Ejected,
    Timeout,
}

impl Outcome {
    pub const ALL: [Outcome; 5] = [
        Outcome::FingertipStable,
        Outcome::Enveloped,
        Outcome::JointLimited,
        Outcome::Ejected,
        Outcome::Timeout,
    ];

    pub fn is_success(self) -> bool {
        matches!(
            self,
            Outcome::FingertipStable | Outcome::Enveloped | Outcome::JointLimited
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::FingertipStable => "fingertip_stable",
            Outcome::Enveloped => "enveloped",
            Outcome::JointLimited => "joint_limited",
            Outcome::Ejected => "ejected",
            Outcome::Timeout => "timeout",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Outcome {
    type Err = SpecError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Outcome::ALL
            .into_iter()
            .find(|o| o.label() == s)
            .ok_or_else(|| SpecError::Unrecognised {
                what: "outcome",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub spec: TrialSpec,
    pub outcome: Outcome,
    pub diverged: bool,
    /// Euclidean 4D joint distance between touch and final grasp, degrees.
    pub pose_change_deg: Option<f64>,
    pub touch_time: Option<f64>,
    pub settle_time: Option<f64>,
    /// Norm of the four tendon torques, N·m.
    pub torque_magnitude_touch: Option<f64>,
    pub torque_magnitude_final: Option<f64>,
    /// Largest penetration over the whole trial, m.
    pub max_penetration: f64,
    /// Largest `|ft| - mu fn` over the trial, N; absent without contacts.
    pub max_cone_excess: Option<f64>,
    pub min_normal_force: Option<f64>,
    pub final_wrench: Wrench,
    pub final_contacts: [usize; 2],
    pub proximal_contact: bool,
    pub trace_path: Option<String>,
}

impl TrialResult {
    pub fn settled(&self) -> bool {
        self.settle_time.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceContact {
    pub link: usize,
    pub point_mm: [f64; 2],
    pub depth_mm: f64,
    pub normal_force: f64,
    pub tangential_force: f64,
    pub sliding: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub time: f64,
    pub phase: String,
    pub joints_deg: [f64; 4],
    pub tendon_torques: [f64; 4],
    /// x mm, y mm, heading deg
    pub object_pose: [f64; 3],
    pub contacts: Vec<TraceContact>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trace {
    pub spec: Option<TrialSpec>,
    pub points: Vec<TracePoint>,
}

pub struct TrialRun {
    pub result: TrialResult,
    pub trace: Option<Trace>,
}

/// `√Σ Δθᵢ²` in degrees.
pub fn pose_change(touch: &JointVector, final_angles: &JointVector) -> f64 {
    (*final_angles - *touch).to_degrees().norm()
}

pub struct ClassifyInput<'a> {
    pub world: &'a WorldState,
    pub settled: bool,
    /// Net torque on each joint at the final step.
    pub net_joint_torque: JointVector,
    pub gripper: &'a GripperParams,
    pub workspace_x: [f64; 2],
    pub workspace_y: [f64; 2],
    pub limit_tolerance: f64,
}

fn in_band(object: &ObjectState, x: [f64; 2], y: [f64; 2]) -> bool {
    let p = object.pose;
    (x[0]..=x[1]).contains(&p.x) && (y[0]..=y[1]).contains(&p.y)
}

fn contacts_per_finger(world: &WorldState) -> [usize; 2] {
    let mut n = [0; 2];
    for c in &world.contacts {
        n[c.link.finger().index()] += 1;
    }
    n
}

pub fn classify_outcome(input: &ClassifyInput) -> Outcome {
    let world = input.world;
    if !in_band(&world.object, input.workspace_x, input.workspace_y) {
        return Outcome::Ejected;
    }
    if contacts_per_finger(world).contains(&0) {
        return Outcome::Ejected;
    }
    if !input.settled {
        return Outcome::Timeout;
    }
    if world.contacts.iter().any(|c| c.link.is_proximal()) {
        return Outcome::Enveloped;
    }
    let q = world.gripper.joints;
    let pinned = (0..4).any(|i| {
        let [lo, hi] = input.gripper.limit(i);
        let tau = input.net_joint_torque[i];
        (q[i] >= hi - input.limit_tolerance && tau > 0.0)
            || (q[i] <= lo + input.limit_tolerance && tau < 0.0)
    });
    if pinned {
        Outcome::JointLimited
    } else {
        Outcome::FingertipStable
    }
}

enum PhaseEnd {
    Settled,
    TimedOut,
    LeftBand,
}

#[derive(Debug)]
enum Abort {
    Diverged,
}

impl From<WorldError> for Abort {
    fn from(_: WorldError) -> Self {
        Abort::Diverged
    }
}

impl From<ControlError> for Abort {
    fn from(_: ControlError) -> Self {
        Abort::Diverged
    }
}

struct Runner<'a> {
    params: &'a HarnessParams,
    plant: Plant,
    trace: Option<Trace>,
    phase: &'static str,
}

impl<'a> Runner<'a> {
    fn in_band(&self) -> bool {
        in_band(
            &self.plant.world.object,
            self.params.workspace_x,
            self.params.workspace_y,
        )
    }

    fn tick(&mut self) -> Result<(), Abort> {
        self.plant.tick()?;
        if let Some(trace) = self.trace.as_mut() {
            let w = &self.plant.world;
            let y = observe_exact(&self.plant);
            trace.points.push(TracePoint {
                time: w.time,
                phase: self.phase.to_string(),
                joints_deg: w.gripper.joints.to_degrees().0,
                tendon_torques: y.tendon_torque_vector().0,
                object_pose: [
                    w.object.pose.x * 1e3,
                    w.object.pose.y * 1e3,
                    w.object.pose.heading.to_degrees(),
                ],
                contacts: w
                    .contacts
                    .iter()
                    .map(|c| TraceContact {
                        link: c.link.0,
                        point_mm: [c.point.x * 1e3, c.point.y * 1e3],
                        depth_mm: c.depth * 1e3,
                        normal_force: c.normal_force,
                        tangential_force: c.tangential_force,
                        sliding: c.tangential_state == TangentialState::Slip,
                    })
                    .collect(),
            });
        }
        Ok(())
    }

    /// Run `control` before every tick until the motion settles (after the
    /// minimum squeeze time), the object leaves the band, or time runs out.
    fn squeeze(
        &mut self,
        timeout: f64,
        mut control: impl FnMut(&mut Plant) -> Result<(), Abort>,
    ) -> Result<PhaseEnd, Abort> {
        let start = self.plant.time();
        let period = self.params.plant.control_period;
        let keep = (self.params.settle.window / period).ceil() as usize + 2;
        let mut history: Vec<MotionSample> = Vec::with_capacity(2 * keep);
        while self.plant.time() - start < timeout - 1e-9 {
            control(&mut self.plant)?;
            self.tick()?;
            if !self.in_band() {
                return Ok(PhaseEnd::LeftBand);
            }
            history.push(self.plant.motion_sample());
            if history.len() > 2 * keep {
                history.drain(..keep);
            }
            if self.plant.time() - start >= self.params.min_squeeze_time - 1e-9
                && is_settled(&history, &self.params.settle)
            {
                return Ok(PhaseEnd::Settled);
            }
        }
        Ok(PhaseEnd::TimedOut)
    }
}

fn observe_exact(plant: &Plant) -> Observation {
    crate::mechanism::observable_feedback(
        &plant.world.seas,
        &plant.params.gripper,
        &plant.params.sea,
    )
}

/// Proximal position per finger in joint units. The underactuated gripper
/// only reports the tendon excursion.
fn proximal_positions(obs: &Observation, plant: &PlantParams) -> [f64; 2] {
    match obs {
        Observation::Full(y) => [y.measured_angles[0], y.measured_angles[2]],
        Observation::Partial(p) => p
            .tendon_angles
            .map(|a| actuator_to_joint_angle(a, &plant.gripper, &plant.sea)),
    }
}

fn initial_object(spec: &TrialSpec, params: &HarnessParams) -> ObjectState {
    let palm = params.plant.gripper.palm_center();
    ObjectState::at_rest(
        spec.object.shape(),
        palm.x,
        palm.y + spec.location_mm * 1e-3,
        params.plant.physics.object_mass,
    )
}

/// Execute one trial: place the object, pre-shape, approach until touch,
/// squeeze with the trial's controller, then classify.
pub fn run_trial(spec: &TrialSpec, params: &HarnessParams, record_trace: bool) -> TrialRun {
    let mut plant_params = params.plant.clone();
    plant_params.gripper.transmission = match spec.controller {
        ControllerKind::PhysUa { ratio } => Transmission::Underactuated {
            distal_to_proximal_ratio: ratio,
        },
        _ => Transmission::FullyActuated,
    };
    let gripper = plant_params.gripper.clone();
    let mut joints = gripper.lower_limits();
    if let Some(deg) = spec.initial_distal_deg {
        for f in Finger::BOTH {
            joints[f.distal()] =
                gripper.clamp_to_limits(&JointVector::splat(deg.to_radians()))[f.distal()];
        }
    }
    let plant = Plant::new(
        plant_params,
        spec.friction.pair(),
        initial_object(spec, params),
        joints,
        spec.seed,
    );
    let mut runner = Runner {
        params,
        plant,
        trace: record_trace.then(|| Trace {
            spec: Some(*spec),
            points: vec![],
        }),
        phase: "approach",
    };

    let mut touch_time = None;
    let mut touch_angles = None;
    let mut touch_magnitude = None;
    let mut settle_time = None;
    let mut diverged = false;
    let status = execute(spec, &mut runner, joints, &mut |t, angles, mag| {
        touch_time = Some(t);
        touch_angles = angles;
        touch_magnitude = Some(mag);
    });
    let mut settled = false;
    match status {
        Ok(Some(t)) => {
            settled = true;
            settle_time = Some(t);
        }
        Ok(None) => {}
        Err(Abort::Diverged) => diverged = true,
    }

    let plant = &mut runner.plant;
    let world = plant.world.clone();
    let outcome = if diverged {
        Outcome::Timeout
    } else {
        classify_outcome(&ClassifyInput {
            world: &world,
            settled,
            net_joint_torque: plant.last_report.net_joint_torque,
            gripper: &gripper,
            workspace_x: params.workspace_x,
            workspace_y: params.workspace_y,
            limit_tolerance: params.limit_tolerance,
        })
    };
    let final_obs = plant.observe();
    let finite = |v: f64| v.is_finite().then_some(v);
    let (pose_change_deg, torque_magnitude_final) = if diverged || touch_time.is_none() {
        (None, None)
    } else {
        let pc = match (touch_angles, final_obs.joint_angles()) {
            (Some(t), Ok(f)) => Some(pose_change(&t, &f)),
            _ => None,
        };
        (pc, Some(final_obs.tendon_torque_vector().norm()))
    };
    let audit = plant.audit;
    let result = TrialResult {
        spec: *spec,
        outcome,
        diverged,
        pose_change_deg,
        touch_time,
        settle_time,
        torque_magnitude_touch: touch_magnitude,
        torque_magnitude_final,
        max_penetration: audit.max_penetration,
        max_cone_excess: finite(audit.max_cone_excess),
        min_normal_force: finite(audit.min_normal_force),
        final_wrench: plant.last_report.wrench,
        final_contacts: contacts_per_finger(&world),
        proximal_contact: world.contacts.iter().any(|c| c.link.is_proximal()),
        trace_path: None,
    };
    TrialRun {
        result,
        trace: runner.trace,
    }
}

/// Returns the settle time, or `None` when the trial ended unsettled.
fn execute(
    spec: &TrialSpec,
    runner: &mut Runner,
    preshape: JointVector,
    on_touch: &mut dyn FnMut(f64, Option<JointVector>, f64),
) -> Result<Option<f64>, Abort> {
    let params = runner.params;
    let period = params.plant.control_period;
    let underactuated = spec.controller.is_underactuated();

    // Approach: proximal joints close gently, distal joints hold the pre-shape.
    let approach = ControlMode::Torque(params.touch.approach_torque);
    let modes: Vec<ControlMode> = if underactuated {
        vec![approach; 2]
    } else {
        let hold = |f: Finger| runner.plant.hold_joint_mode(preshape[f.distal()]);
        vec![
            approach,
            hold(Finger::First),
            approach,
            hold(Finger::Second),
        ]
    };
    runner.plant.set_modes(&modes);
    let mut detector = TouchDetector::default();
    let mut obs = runner.plant.observe();
    let mut prev = proximal_positions(&obs, &params.plant);
    let start = runner.plant.time();
    loop {
        if runner.plant.time() - start >= params.approach_timeout - 1e-9 {
            return Ok(None);
        }
        runner.tick()?;
        if !runner.in_band() {
            return Ok(None);
        }
        obs = runner.plant.observe();
        let pos = proximal_positions(&obs, &params.plant);
        let speed = [(pos[0] - prev[0]) / period, (pos[1] - prev[1]) / period];
        prev = pos;
        let torque = [
            obs.proximal_torque(Finger::First),
            obs.proximal_torque(Finger::Second),
        ];
        let baseline = match obs {
            Observation::Full(_) => {
                let g = &params.plant.gripper;
                Finger::BOTH.map(|f| {
                    let j = f.proximal();
                    g.restoring_stiffness[j] * (pos[f.index()] - g.restoring_rest_angle[j])
                })
            }
            Observation::Partial(_) => [0.0; 2],
        };
        if detector.update(&params.touch, torque, baseline, speed, period) {
            break;
        }
    }
    let touch_angles = obs.joint_angles().ok();
    on_touch(
        runner.plant.time(),
        touch_angles,
        obs.tendon_torque_vector().norm(),
    );

    let torque_modes = |plant: &mut Plant, ratio: f64| -> Result<(), Abort> {
        let setpoints = fixed_ratio_step(params.fixed_ratio_torque, ratio)?;
        let modes: Vec<ControlMode> = setpoints.iter().map(|&t| ControlMode::Torque(t)).collect();
        plant.set_modes(&modes);
        Ok(())
    };

    runner.phase = "squeeze";
    let end = match spec.controller {
        ControllerKind::Mimo
        | ControllerKind::Transition
        | ControllerKind::Enveloping(SqueezeController::Mimo) => {
            let touch = touch_angles.expect("fully actuated gripper exposes joint angles");
            let gains = build_gain_matrices(&params.gains);
            let u = make_reference(&touch, &params.max_torques);
            let mut state = ControllerState::squeezing(touch);
            runner.squeeze(params.trial_timeout, |plant| {
                let obs = plant.observe();
                let y = *obs
                    .full()
                    .expect("fully actuated gripper exposes full feedback");
                let (c, next) = mimo_step(&u, &y, &state, &gains, period, params.integrator_limit)?;
                state = next;
                let modes: Vec<ControlMode> =
                    c.iter().map(|&ci| plant.motor_position_mode(ci)).collect();
                plant.set_modes(&modes);
                Ok(())
            })?
        }
        ControllerKind::FixedRatio { ratio }
        | ControllerKind::Enveloping(SqueezeController::FixedRatio { ratio }) => {
            torque_modes(&mut runner.plant, ratio)?;
            runner.squeeze(params.trial_timeout, |_| Ok(()))?
        }
        ControllerKind::PhysUa { .. } => {
            runner
                .plant
                .set_modes(&[ControlMode::Torque(params.fixed_ratio_torque); 2]);
            runner.squeeze(params.trial_timeout, |_| Ok(()))?
        }
    };
    let mut end = end;
    if matches!(spec.controller, ControllerKind::Transition) && matches!(end, PhaseEnd::Settled) {
        let holding = contacts_per_finger(&runner.plant.world);
        if holding.contains(&0) {
            return Ok(Some(runner.plant.time()));
        }
        runner.phase = "transition";
        torque_modes(&mut runner.plant, params.transition_ratio)?;
        end = runner.squeeze(params.transition_timeout, |_| Ok(()))?;
    }
    Ok(match end {
        PhaseEnd::Settled => Some(runner.plant.time()),
        PhaseEnd::TimedOut | PhaseEnd::LeftBand => None,
    })
}

/// Run trials, in parallel unless `jobs == Some(1)`. Results keep the
/// order of `specs` regardless of scheduling.
pub fn run_trials(
    specs: &[TrialSpec],
    params: &HarnessParams,
    jobs: Option<usize>,
    trace: bool,
) -> Vec<TrialRun> {
    match jobs {
        Some(1) => specs.iter().map(|s| run_trial(s, params, trace)).collect(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool");
            pool.install(|| {
                specs
                    .par_iter()
                    .map(|s| run_trial(s, params, trace))
                    .collect()
            })
        }
        None => specs
            .par_iter()
            .map(|s| run_trial(s, params, trace))
            .collect(),
    }
}
