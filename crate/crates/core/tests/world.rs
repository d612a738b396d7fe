use sea_grasp::contact::*;
use sea_grasp::mechanism::*;
use sea_grasp::world::*;

fn world_with(object: ObjectState, joints: JointVector) -> WorldState {
    WorldState {
        gripper: GripperState {
            joints,
            joint_velocities: JointVector::ZERO,
        },
        seas: vec![],
        object,
        contacts: vec![],
        time: 0.0,
    }
}

fn far_object() -> ObjectState {
    ObjectState::at_rest(ObjectShape::Circle { diameter: 0.067 }, 0.0, 0.5, 0.1)
}

#[test]
fn rest_is_a_fixed_point() {
    let g = GripperParams::default();
    let p = PhysicsParams::default();
    let rest = g.restoring_rest_angle;
    let mut w = world_with(far_object(), rest);
    for _ in 0..1000 {
        let act = g.restoring_torques(&w.gripper.joints) * -1.0;
        w = step_world(&w, &act, &g, &p, &MaterialPair::RUBBER, p.substep)
            .unwrap()
            .0;
    }
    assert_eq!(w.gripper.joints, rest);
    assert_eq!(w.gripper.joint_velocities, JointVector::ZERO);
    assert_eq!(w.object.pose, far_object().pose);
}

#[test]
fn constant_flexion_hits_upper_stop() {
    let g = GripperParams::default();
    let p = PhysicsParams::default();
    let mut w = world_with(far_object(), JointVector::ZERO);
    for _ in 0..5000 {
        let act = JointVector::splat(0.1) - g.restoring_torques(&w.gripper.joints);
        w = step_world(&w, &act, &g, &p, &MaterialPair::RUBBER, p.substep)
            .unwrap()
            .0;
    }
    for i in 0..4 {
        assert_eq!(w.gripper.joints[i], g.limit(i)[1]);
        assert_eq!(w.gripper.joint_velocities[i], 0.0);
    }
}

#[test]
fn opposing_fingertips_balance_circle() {
    // Mirror-symmetric fingertips pressing a centred circle: the x forces
    // cancel exactly and there is no y component.
    let g = GripperParams::default();
    let p = PhysicsParams::default();
    let q = JointVector::symmetric(0.0, 0.0);
    let caps = forward_kinematics(&g, &q);
    let x_inner = caps[D1].a.x + g.link_capsule_radius;
    let radius = -x_inner + 0.0008;
    let obj = ObjectState::at_rest(
        ObjectShape::Circle {
            diameter: 2.0 * radius,
        },
        0.0,
        0.12,
        0.1,
    );
    let w = world_with(obj, q);
    let (next, report) = step_world(
        &w,
        &JointVector::ZERO,
        &g,
        &p,
        &MaterialPair::RUBBER,
        p.substep,
    )
    .unwrap();
    assert_eq!(next.contacts.len(), 2);
    assert!(next.contacts.iter().any(|c| c.link == LinkId(D1)));
    assert!(next.contacts.iter().any(|c| c.link == LinkId(D2)));
    assert!(report.wrench.fx.abs() < 1e-12);
    assert!(report.wrench.fy.abs() < 1e-12);
    assert_eq!(next.object.velocity.vx, 0.0);
    assert!(next.object.velocity.vy.abs() < 1e-12);
}

#[test]
fn reaction_torques_do_equal_virtual_work() {
    // Forces applied to the object are returned on the links; the joint
    // torques must do the same virtual work as the link forces.
    let g = GripperParams::default();
    let p = PhysicsParams::default();
    let mut q = g.lower_limits();
    q[P1] = 0.1;
    q[D1] = 0.3;
    let caps = forward_kinematics(&g, &q);
    let tip = caps[D1].b;
    let obj = ObjectState::at_rest(
        ObjectShape::Circle { diameter: 0.03 },
        tip.x + 0.015 + 0.008 - 0.001,
        tip.y,
        0.1,
    );
    let w = world_with(obj, q);
    let (next, report) = step_world(
        &w,
        &JointVector::ZERO,
        &g,
        &p,
        &MaterialPair::RUBBER,
        p.substep,
    )
    .unwrap();
    assert_eq!(next.contacts.len(), 1);
    let c = next.contacts[0];
    let f_link = -c.force_on_object();
    let dq = JointVector::new(1e-3, -2e-3, 0.0, 0.0);
    let dp = point_jacobian(c.link.finger(), &caps, c.link, 0, &c.point) * dq[0]
        + point_jacobian(c.link.finger(), &caps, c.link, 1, &c.point) * dq[1];
    let work_link = f_link.dot(&dp);
    let work_joint: f64 = (0..4).map(|i| report.contact_torque[i] * dq[i]).sum();
    assert!((work_link - work_joint).abs() < 1e-15);
    assert!(f_link.norm() > 0.0);
}

fn sample(t: f64, joint: f64) -> MotionSample {
    MotionSample {
        time: t,
        joint_velocities: JointVector::new(joint, 0.0, 0.0, 0.0),
        ..Default::default()
    }
}

#[test]
fn settle_window_semantics() {
    let lim = SettleThresholds::default();
    let quiet: Vec<_> = (0..=60).map(|i| sample(i as f64 * 0.01, 0.0)).collect();
    assert!(is_settled(&quiet, &lim));

    let shaking: Vec<_> = (0..=60)
        .map(|i| {
            sample(
                i as f64 * 0.01,
                5f64.to_radians() * (i as f64).sin().signum(),
            )
        })
        .collect();
    assert!(!is_settled(&shaking, &lim));

    // decaying transient crossing the threshold at 0.3 s
    let decay: Vec<_> = (0..=100)
        .map(|i| {
            let t = i as f64 * 0.01;
            let speed = if t < 0.3 { 2.0_f64 } else { 0.1 };
            sample(t, speed.to_radians())
        })
        .collect();
    let crossing = decay.iter().position(|s| s.is_quiet(&lim)).unwrap();
    for end in crossing..decay.len() {
        let settled = is_settled(&decay[..=end], &lim);
        let span = decay[end].time - decay[crossing].time;
        assert_eq!(settled, span >= lim.window - 1e-9, "end {end}");
    }

    assert!(!is_settled(&quiet[..10], &lim));
}
