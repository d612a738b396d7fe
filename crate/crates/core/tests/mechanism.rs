use proptest::prelude::*;
use sea_grasp::geometry::*;
use sea_grasp::mechanism::*;
use sea_grasp::sea::*;

fn sea_params() -> SeaParams {
    SeaParams {
        spring_stiffness: 1.0,
        ..SeaParams::default()
    }
}

/// Round-number hand for the trigonometry oracles.
fn hand() -> GripperParams {
    GripperParams {
        proximal_length: 0.080,
        distal_length: 0.070,
        finger_base_positions: [Vec2::new(-0.040, 0.0), Vec2::new(0.040, 0.0)],
        ..GripperParams::default()
    }
}

#[test]
fn straight_fingers_at_zero() {
    let p = hand();
    let caps = forward_kinematics(&p, &JointVector::ZERO);
    for f in Finger::BOTH {
        let tip = caps[f.distal()].b;
        let base = p.finger_base_positions[f.index()];
        assert!((tip.x - base.x).abs() < 1e-15);
        assert!(((tip - base).norm() - 0.150).abs() < 1e-12);
    }
    assert_eq!(caps[P1].b.y, caps[P2].b.y);
}

#[test]
fn proximal_at_right_angle_lies_along_palm() {
    let p = GripperParams::default();
    let caps = forward_kinematics(&p, &JointVector::symmetric(90f64.to_radians(), 0.0));
    let dir = caps[P1].b - caps[P1].a;
    assert!(dir.y.abs() < 1e-12);
    assert!(dir.x > 0.0);
    let dir2 = caps[P2].b - caps[P2].a;
    assert!(dir2.x < 0.0);
}

#[test]
fn distal_tip_matches_hand_trig() {
    let p = hand();
    let (tp, td) = (30f64.to_radians(), 60f64.to_radians());
    let caps = forward_kinematics(&p, &JointVector::symmetric(tp, td));
    // 80 mm at 30 deg then 70 mm at 90 deg from the palm normal:
    // x = -40 + 80 sin30 + 70 sin90 = 70, y = 80 cos30 + 70 cos90
    let expected = Vec2::new(0.070, 0.080 * 3f64.sqrt() / 2.0);
    assert!((caps[D1].b - expected).norm() < 1e-12);
    assert!((caps[D2].b - Vec2::new(-0.070, expected.y)).norm() < 1e-12);
}

#[test]
fn no_force_at_rest_gives_zero_torque() {
    let p = GripperParams::default();
    let rest = p.restoring_rest_angle;
    assert_eq!(joint_torques(&[0.0; 4], &rest, &p), JointVector::ZERO);
}

#[test]
fn distal_tendon_does_not_load_proximal() {
    let p = GripperParams::default();
    let t = gross_tendon_torques(&[0.0, 10.0, 0.0, 0.0], &p);
    assert_eq!(t[P1], 0.0);
    assert!((t[D1] - 0.1).abs() < 1e-15);
}

#[test]
fn underactuated_ratio_split() {
    let p = GripperParams {
        transmission: Transmission::Underactuated {
            distal_to_proximal_ratio: 0.5,
        },
        ..GripperParams::default()
    };
    let t = gross_tendon_torques(&[10.0, 10.0], &p);
    assert!((t[P1] - 0.1).abs() < 1e-15);
    assert!((t[D1] - 0.05).abs() < 1e-15);
    assert_eq!(t.swap_fingers(), t);
}

#[test]
fn full_feedback_at_rest() {
    let p = GripperParams::default();
    let s = sea_params();
    let rest = p.restoring_rest_angle;
    let seas: Vec<_> = pulley_angles(&rest, &p, &s)
        .into_iter()
        .map(SeaState::relaxed)
        .collect();
    let y = observable_feedback(&seas, &p, &s);
    let y = y.full().unwrap();
    for i in 0..4 {
        assert!((y.measured_angles[i] - rest[i]).abs() < 1e-15);
    }
    assert_eq!(y.measured_torques, JointVector::ZERO);
}

#[test]
fn distal_deflection_reads_as_torque() {
    let p = GripperParams::default();
    let s = sea_params();
    let mut seas: Vec<_> = (0..4).map(|_| SeaState::relaxed(0.0)).collect();
    seas[D1].theta_motor = -0.1;
    let y = observable_feedback(&seas, &p, &s);
    let expected = s.spring_stiffness * 0.1 / s.pulley_radius * p.joint_pulley_radius;
    assert!((y.joint_torque(D1).unwrap() - expected).abs() < 1e-15);
    assert_eq!(y.joint_torque(P1).unwrap(), 0.0);
}

#[test]
fn underactuated_masks_angles() {
    let p = GripperParams {
        transmission: Transmission::Underactuated {
            distal_to_proximal_ratio: 0.4,
        },
        ..GripperParams::default()
    };
    let s = sea_params();
    let seas = vec![SeaState::relaxed(0.3), SeaState::relaxed(0.3)];
    let y = observable_feedback(&seas, &p, &s);
    assert!(matches!(y.joint_angles(), Err(MechanismError::Masked(_))));
    assert!(y.full().is_err());
    assert!(y.joint_torque(D1).is_err());
    assert!(y.joint_torque(P2).is_ok());
}

#[test]
fn pulley_map_roundtrip() {
    let p = GripperParams::default();
    let s = sea_params();
    let q = JointVector::new(0.1, -0.2, 0.3, 0.7);
    let pulleys = pulley_angles(&q, &p, &s);
    for i in 0..4 {
        assert_eq!(actuator_to_joint_angle(pulleys[i], &p, &s), q[i]);
        assert_eq!(joint_to_actuator_angle(q[i], &p, &s), pulleys[i]);
    }
}

#[test]
fn jacobian_matches_finite_difference() {
    let p = GripperParams::default();
    let q = JointVector::new(0.2, 0.5, 0.3, 0.1);
    let caps = forward_kinematics(&p, &q);
    // point at 60 % along distal 1, fixed in the link frame
    let frac = 0.6;
    let point_at = |q: &JointVector| {
        let c = forward_kinematics(&p, q);
        c[D1].a + (c[D1].b - c[D1].a) * frac
    };
    let point = point_at(&q);
    let h = 1e-7;
    for joint in [P1, D1] {
        let mut qp = q;
        qp[joint] += h;
        let mut qm = q;
        qm[joint] -= h;
        let fd = (point_at(&qp) - point_at(&qm)) / (2.0 * h);
        let jac = point_jacobian(Finger::First, &caps, LinkId(D1), joint, &point);
        assert!((fd - jac).norm() < 1e-6, "joint {joint}: {fd:?} vs {jac:?}");
    }
    assert_eq!(
        point_jacobian(Finger::First, &caps, LinkId(P1), D1, &point),
        Vec2::zeros()
    );
    assert_eq!(
        point_jacobian(Finger::First, &caps, LinkId(D1), P2, &point),
        Vec2::zeros()
    );
}

fn mirror(v: Vec2) -> Vec2 {
    Vec2::new(-v.x, v.y)
}

proptest! {
    #[test]
    fn finger_swap_mirrors_kinematics(a in -0.7f64..1.7, b in -0.3f64..1.9, c in -0.7f64..1.7, d in -0.3f64..1.9) {
        let p = GripperParams::default();
        let q = JointVector::new(a, b, c, d);
        let caps = forward_kinematics(&p, &q);
        let swapped = forward_kinematics(&p, &q.swap_fingers());
        for (i, j) in [(P1, P2), (D1, D2), (P2, P1), (D2, D1)] {
            prop_assert_eq!(swapped[i].a, mirror(caps[j].a));
            prop_assert_eq!(swapped[i].b, mirror(caps[j].b));
        }
    }

    #[test]
    fn torque_map_is_swap_equivariant(f in proptest::array::uniform4(0.0f64..50.0), q in proptest::array::uniform4(-0.5f64..1.5)) {
        let p = GripperParams::default();
        let q = JointVector(q);
        let t = joint_torques(&f, &q, &p);
        let fs = [f[2], f[3], f[0], f[1]];
        prop_assert_eq!(joint_torques(&fs, &q.swap_fingers(), &p), t.swap_fingers());
    }

    #[test]
    fn distal_force_never_moves_proximal_torque(f in proptest::array::uniform4(0.0f64..50.0), extra in 0.0f64..50.0, q in proptest::array::uniform4(-0.5f64..1.5)) {
        let p = GripperParams::default();
        let q = JointVector(q);
        let base = joint_torques(&f, &q, &p);
        for d in [D1, D2] {
            let mut g = f;
            g[d] += extra;
            let t = joint_torques(&g, &q, &p);
            prop_assert_eq!(t[P1] - base[P1], 0.0);
            prop_assert_eq!(t[P2] - base[P2], 0.0);
        }
    }

    #[test]
    fn underactuated_ratio_is_exact(f in 0.0f64..50.0, ratio in 0.05f64..2.0) {
        let p = GripperParams {
            transmission: Transmission::Underactuated { distal_to_proximal_ratio: ratio },
            ..GripperParams::default()
        };
        let t = gross_tendon_torques(&[f, f], &p);
        prop_assert_eq!(t[D1], ratio * t[P1]);
    }
}
