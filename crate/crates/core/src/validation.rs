//! Self-checks run by `seagrasp validate`: controller algebra against
//! element-wise oracles, contact geometry against closed forms, and one
//! short trial audited for determinism and physical plausibility.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contact::{detect_contacts, ObjectShape, ObjectState};
use crate::control::{
    build_gain_matrices, mimo_step, ControllerState, GainSchedule, ReferenceVector,
};
use crate::geometry::{Capsule, Vec2};
use crate::harness::{run_trial, ControllerKind, Friction, HarnessParams, ObjectKind, TrialSpec};
use crate::mechanism::{FeedbackVector, JointVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed,
            detail: detail.into(),
        }
    }
}

const SAMPLES: usize = 1000;

fn random_joints(rng: &mut ChaCha8Rng, scale: f64) -> JointVector {
    JointVector(std::array::from_fn(|_| rng.random_range(-scale..scale)))
}

/// Expected gain entry from the schedule, written out per element.
fn expected_gain(s: &GainSchedule, which: usize, row: usize, col: usize) -> f64 {
    let [b1, b2, b3, b4, b5, b6] = s.b;
    let [w1, w2, w3, w4] = s.w;
    let distal = col % 2 == 1;
    let diag = row == col % 4;
    match (which, col < 4) {
        (0, true) => f64::from(row == col),
        (0, false) => 0.0,
        (1, true) => (if diag { w1 } else { w2 }) * if distal { b2 } else { b1 },
        (1, false) => (if diag { w3 } else { w4 }) * if distal { b4 } else { b3 },
        (_, true) => (if diag { w1 } else { w2 }) * if distal { b6 } else { b5 },
        (_, false) => 0.0,
    }
}

fn check_gains(schedule: &GainSchedule) -> Check {
    let g = build_gain_matrices(schedule);
    let mut worst = 0usize;
    for (which, m) in [g.feedforward, g.kp, g.ki].iter().enumerate() {
        for row in 0..4 {
            for col in 0..8 {
                if m[(row, col)] != expected_gain(schedule, which, row, col) {
                    worst += 1;
                }
            }
        }
    }
    Check::new(
        "gain matrices",
        worst == 0,
        format!("{worst} mismatched entries"),
    )
}

fn check_controller(schedule: &GainSchedule, limit: f64, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let gains = build_gain_matrices(schedule);
    let dt = 0.01;
    let mut worst_rel = 0.0f64;
    let mut swap_ok = true;
    let mut integrator_ok = true;
    for _ in 0..SAMPLES {
        let u = ReferenceVector {
            desired_angles: random_joints(rng, 1.5),
            reference_torques: random_joints(rng, 0.5),
        };
        let y = FeedbackVector {
            measured_angles: random_joints(rng, 1.5),
            measured_torques: random_joints(rng, 0.5),
        };
        let mut state = ControllerState::squeezing(u.desired_angles);
        state.integrator = random_joints(rng, limit);
        let (c, next) = mimo_step(&u, &y, &state, &gains, dt, limit).expect("finite sample");
        let uv = u.as_vector();
        let e: Vec<f64> = (0..8).map(|j| uv[j] - y.as_array()[j]).collect();
        for i in 0..4 {
            let integ = (state.integrator[i] + e[i] * dt).clamp(-limit, limit);
            integrator_ok &= integ == next.integrator[i];
            let mut expect = uv[i];
            for j in 0..8 {
                expect += expected_gain(schedule, 1, i, j) * e[j];
            }
            for j in 0..4 {
                expect += expected_gain(schedule, 2, i, j) * next.integrator[j];
            }
            let scale = expect.abs().max(1e-12);
            worst_rel = worst_rel.max((c[i] - expect).abs() / scale);
        }
        let mut swapped = state;
        swapped.integrator = state.integrator.swap_fingers();
        swapped.touch_snapshot = state.touch_snapshot.map(|t| t.swap_fingers());
        let (cs, _) = mimo_step(
            &u.swap_fingers(),
            &y.swap_fingers(),
            &swapped,
            &gains,
            dt,
            limit,
        )
        .expect("finite");
        swap_ok &= cs == c.swap_fingers();
    }
    vec![
        Check::new(
            "controller output",
            worst_rel <= 1e-12,
            format!("worst relative error {worst_rel:e}"),
        ),
        Check::new(
            "integrator clamp",
            integrator_ok,
            format!("{SAMPLES} samples"),
        ),
        Check::new("finger swap", swap_ok, format!("{SAMPLES} samples")),
    ]
}

/// Circles against a horizontal capsule: depth is `r + rc - distance` to
/// the clamped projection of the center.
fn check_circle_contacts(rng: &mut ChaCha8Rng) -> Check {
    let capsule = Capsule {
        a: Vec2::new(-0.04, 0.05),
        b: Vec2::new(0.04, 0.05),
        radius: 0.008,
    };
    let idle = Capsule {
        a: Vec2::new(1.0, 1.0),
        b: Vec2::new(1.1, 1.0),
        radius: 0.001,
    };
    let mut worst = 0.0f64;
    let mut mismatched = 0;
    for _ in 0..SAMPLES {
        let d = rng.random_range(0.02..0.08);
        let x = rng.random_range(-0.08..0.08);
        let y = 0.05 + rng.random_range(-0.06..0.06);
        let object = ObjectState::at_rest(ObjectShape::Circle { diameter: d }, x, y, 0.1);
        let px = x.clamp(-0.04, 0.04);
        let dist = ((x - px).powi(2) + (y - 0.05).powi(2)).sqrt();
        let depth = d / 2.0 + 0.008 - dist;
        let contacts = detect_contacts(&[capsule, idle, idle, idle], &object);
        match (contacts.first(), depth > 0.0 && dist > 0.0) {
            (Some(c), true) => worst = worst.max((c.depth - depth).abs()),
            (None, false) => {}
            _ => mismatched += 1,
        }
    }
    Check::new(
        "circle contact depth",
        mismatched == 0 && worst <= 1e-12,
        format!("worst error {worst:e} m, {mismatched} detection mismatches"),
    )
}

/// An unrotated box resting on a longer horizontal capsule: the deepest
/// contact equals the overlap of the face with the capsule surface.
fn check_box_contacts(rng: &mut ChaCha8Rng) -> Check {
    let capsule = Capsule {
        a: Vec2::new(-0.1, 0.0),
        b: Vec2::new(0.1, 0.0),
        radius: 0.008,
    };
    let idle = Capsule {
        a: Vec2::new(1.0, 1.0),
        b: Vec2::new(1.1, 1.0),
        radius: 0.001,
    };
    let mut worst = 0.0f64;
    let mut missing = 0;
    for _ in 0..SAMPLES {
        let side = rng.random_range(0.02..0.06);
        let overlap = rng.random_range(1e-5..2e-3);
        let x = rng.random_range(-0.05..0.05);
        let y = side / 2.0 + 0.008 - overlap;
        let object = ObjectState::at_rest(ObjectShape::SquareBox { side }, x, y, 0.1);
        let contacts = detect_contacts(&[capsule, idle, idle, idle], &object);
        match contacts.iter().map(|c| c.depth).reduce(f64::max) {
            Some(depth) => worst = worst.max((depth - overlap).abs()),
            None => missing += 1,
        }
    }
    Check::new(
        "box contact depth",
        missing == 0 && worst <= 1e-12,
        format!("worst error {worst:e} m, {missing} missed"),
    )
}

fn check_trial(params: &HarnessParams, seed: u64) -> Vec<Check> {
    let spec = TrialSpec {
        controller: ControllerKind::Mimo,
        object: ObjectKind::BIG_CYLINDER,
        location_mm: 120.0,
        initial_distal_deg: Some(30.0),
        friction: Friction::Rubber,
        seed,
    };
    let a = run_trial(&spec, params, false).result;
    let b = run_trial(&spec, params, false).result;
    let w = a.final_wrench;
    vec![
        Check::new(
            "deterministic trial",
            a == b,
            format!("outcome {}", a.outcome),
        ),
        Check::new(
            "trial succeeds",
            a.outcome.is_success(),
            format!("outcome {}", a.outcome),
        ),
        Check::new(
            "penetration bound",
            a.max_penetration < 2e-3,
            format!("max penetration {:.3} mm", a.max_penetration * 1e3),
        ),
        Check::new(
            "friction cone",
            a.max_cone_excess.is_none_or(|x| x <= 1e-9),
            format!("max excess {:?} N", a.max_cone_excess),
        ),
        Check::new(
            "mirror symmetry",
            a.final_contacts[0] == a.final_contacts[1] && w.fx.abs() < 1e-9,
            format!(
                "contacts {:?}, lateral force {:e} N",
                a.final_contacts, w.fx
            ),
        ),
    ]
}

/// Run every check. Deterministic for a given seed.
pub fn run_all(params: &HarnessParams, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![check_gains(&params.gains)];
    out.extend(check_controller(
        &params.gains,
        params.integrator_limit,
        &mut rng,
    ));
    out.push(check_circle_contacts(&mut rng));
    out.push(check_box_contacts(&mut rng));
    out.extend(check_trial(params, seed));
    out
}
