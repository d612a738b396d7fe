use sea_grasp::contact::*;
use sea_grasp::geometry::*;
use sea_grasp::mechanism::*;

#[test]
fn palm_penetration() {
    let circle = ObjectState::at_rest(ObjectShape::Circle { diameter: 0.04 }, 0.01, 0.019, 0.1);
    let p = palm_penetrations(&circle, 0.0);
    assert_eq!(p.len(), 1);
    assert!((p[0].1 - 0.001).abs() < 1e-15);
    assert!((p[0].0 - Vec2::new(0.01, -0.0005)).norm() < 1e-15);
    let mut square = ObjectState::at_rest(ObjectShape::SquareBox { side: 0.04 }, 0.0, 0.019, 0.1);
    assert_eq!(palm_penetrations(&square, 0.0).len(), 2);
    square.pose.heading = 0.1;
    assert_eq!(palm_penetrations(&square, 0.0).len(), 1);
    square.pose.y = 0.05;
    assert!(palm_penetrations(&square, 0.0).is_empty());
}

fn far_capsules() -> [Capsule; 4] {
    let c = Capsule {
        a: Vec2::new(10.0, 10.0),
        b: Vec2::new(10.0, 11.0),
        radius: 0.008,
    };
    [c; 4]
}

#[test]
fn distant_object_has_no_contacts() {
    let caps = sea_grasp::mechanism::forward_kinematics(
        &sea_grasp::mechanism::GripperParams::default(),
        &sea_grasp::mechanism::JointVector::ZERO,
    );
    let obj = ObjectState::at_rest(ObjectShape::Circle { diameter: 0.067 }, 0.0, 0.5, 0.1);
    assert!(detect_contacts(&caps, &obj).is_empty());
}

#[test]
fn circle_between_vertical_fingertips() {
    // Analytic oracle: vertical segments at x = +-(R + r - 0.5 mm), the
    // closest point is the horizontal projection of the center.
    let (big_r, r, pen) = (0.0335, 0.008, 0.0005);
    let x = big_r + r - pen;
    let mut caps = far_capsules();
    caps[D1] = Capsule {
        a: Vec2::new(-x, 0.08),
        b: Vec2::new(-x, 0.15),
        radius: r,
    };
    caps[D2] = Capsule {
        a: Vec2::new(x, 0.08),
        b: Vec2::new(x, 0.15),
        radius: r,
    };
    let obj = ObjectState::at_rest(
        ObjectShape::Circle {
            diameter: 2.0 * big_r,
        },
        0.0,
        0.12,
        0.1,
    );
    let contacts = detect_contacts(&caps, &obj);
    assert_eq!(contacts.len(), 2);
    let c1 = contacts.iter().find(|c| c.link == LinkId(D1)).unwrap();
    let c2 = contacts.iter().find(|c| c.link == LinkId(D2)).unwrap();
    assert!((c1.depth - pen).abs() < 1e-12);
    assert!((c2.depth - pen).abs() < 1e-12);
    assert!((c1.normal - Vec2::new(1.0, 0.0)).norm() < 1e-12);
    assert!((c2.normal - Vec2::new(-1.0, 0.0)).norm() < 1e-12);
    assert!((c1.point.y - 0.12).abs() < 1e-12);
}

#[test]
fn box_face_flush_with_capsule() {
    // Box side 57 mm at origin; capsule parallel to the +x face,
    // overlapping it by 1 mm over y in [-10, 20] mm.
    let h = 0.0285;
    let r = 0.008;
    let x = h + r - 0.001;
    let mut caps = far_capsules();
    caps[D1] = Capsule {
        a: Vec2::new(x, -0.010),
        b: Vec2::new(x, 0.020),
        radius: r,
    };
    let obj = ObjectState::at_rest(ObjectShape::SquareBox { side: 2.0 * h }, 0.0, 0.0, 0.1);
    let contacts = detect_contacts(&caps, &obj);
    // supported at both segment ends
    assert_eq!(contacts.len(), 2);
    let mut ys: Vec<f64> = contacts.iter().map(|c| c.point.y).collect();
    ys.sort_by(f64::total_cmp);
    assert!((ys[0] + 0.010).abs() < 1e-12 && (ys[1] - 0.020).abs() < 1e-12);
    for c in &contacts {
        assert!((c.depth - 0.001).abs() < 1e-12);
        assert!((c.normal - Vec2::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((c.point.x - (h - 0.0005)).abs() < 1e-12);
    }
}

#[test]
fn flush_capsule_longer_than_face_rests_on_corners() {
    let h = 0.0195;
    let r = 0.008;
    let x = h + r - 0.001;
    let mut caps = far_capsules();
    caps[D1] = Capsule {
        a: Vec2::new(x, -0.05),
        b: Vec2::new(x, 0.05),
        radius: r,
    };
    let obj = ObjectState::at_rest(ObjectShape::SquareBox { side: 2.0 * h }, 0.0, 0.0, 0.1);
    let contacts = detect_contacts(&caps, &obj);
    assert_eq!(contacts.len(), 2);
    for c in &contacts {
        assert!((c.depth - 0.001).abs() < 1e-12);
        assert!((c.point.y.abs() - h).abs() < 1e-12);
    }
}

#[test]
fn box_face_tilted_capsule_contacts_deepest_end() {
    let h = 0.0285;
    let r = 0.008;
    let mut caps = far_capsules();
    // Lower end 1 mm into the face, upper end clear of it.
    caps[D1] = Capsule {
        a: Vec2::new(h + r - 0.001, 0.0),
        b: Vec2::new(h + r + 0.010, 0.020),
        radius: r,
    };
    let obj = ObjectState::at_rest(ObjectShape::SquareBox { side: 2.0 * h }, 0.0, 0.0, 0.1);
    let contacts = detect_contacts(&caps, &obj);
    assert_eq!(contacts.len(), 1);
    let c = contacts[0];
    assert!((c.depth - 0.001).abs() < 1e-12);
    assert!((c.normal - Vec2::new(-1.0, 0.0)).norm() < 1e-12);
    assert!(c.point.y.abs() < 1e-12);
}

#[test]
fn tilting_flush_capsule_changes_depth_continuously() {
    let h = 0.0285;
    let r = 0.008;
    let obj = ObjectState::at_rest(ObjectShape::SquareBox { side: 2.0 * h }, 0.0, 0.0, 0.1);
    let total = |tilt: f64| {
        let mut caps = far_capsules();
        let x = h + r - 0.001;
        caps[D1] = Capsule {
            a: Vec2::new(x, -0.010),
            b: Vec2::new(x + tilt, 0.020),
            radius: r,
        };
        detect_contacts(&caps, &obj)
            .iter()
            .map(|c| c.depth)
            .sum::<f64>()
    };
    let mut prev = total(-0.0005);
    for i in -49..=50 {
        let t = i as f64 * 1e-5;
        let now = total(t);
        assert!((now - prev).abs() < 2.1e-5, "jump at tilt {t}");
        prev = now;
    }
}

#[test]
fn box_corner_into_capsule_side() {
    let h = 0.02;
    let r = 0.008;
    let mut caps = far_capsules();
    // Horizontal capsule above the rotated box's top corner.
    caps[P1] = Capsule {
        a: Vec2::new(-0.05, 0.0),
        b: Vec2::new(0.05, 0.0),
        radius: r,
    };
    let corner_reach = h * 2f64.sqrt();
    let mut obj = ObjectState::at_rest(ObjectShape::SquareBox { side: 2.0 * h }, 0.0, 0.0, 0.1);
    obj.pose.heading = std::f64::consts::FRAC_PI_4;
    obj.pose.y = -(corner_reach + r - 0.002);
    let contacts = detect_contacts(&caps, &obj);
    assert_eq!(contacts.len(), 1);
    let c = contacts[0];
    assert!((c.depth - 0.002).abs() < 1e-12);
    assert!((c.normal - Vec2::new(0.0, -1.0)).norm() < 1e-12);
    assert!(c.point.x.abs() < 1e-12);
}

#[test]
fn zero_depth_static_contact_is_forceless() {
    let c = Contact::fresh(LinkId(D1), 0, Vec2::zeros(), Vec2::new(1.0, 0.0), 0.0);
    let f = contact_force(
        &c,
        &Vec2::zeros(),
        &MaterialPair::VINYL,
        &PenaltyParams::default(),
        1e-3,
    );
    assert_eq!(f.normal_force, 0.0);
    assert_eq!(f.tangential_force, 0.0);
}

fn soft() -> PenaltyParams {
    PenaltyParams {
        kn: 5000.0,
        ..PenaltyParams::default()
    }
}

#[test]
fn penalty_normal_force() {
    let c = Contact::fresh(LinkId(D1), 0, Vec2::zeros(), Vec2::new(1.0, 0.0), 0.001);
    let f = contact_force(&c, &Vec2::zeros(), &MaterialPair::VINYL, &soft(), 1e-3);
    assert!((f.normal_force - 5.0).abs() < 1e-12);
}

#[test]
fn separating_contact_gets_no_damping_pull() {
    let c = Contact::fresh(LinkId(D1), 0, Vec2::zeros(), Vec2::new(1.0, 0.0), 0.0001);
    // object moving away from the link
    let f = contact_force(
        &c,
        &Vec2::new(1.0, 0.0),
        &MaterialPair::VINYL,
        &soft(),
        1e-3,
    );
    assert!(f.normal_force >= 0.0);
    assert!((f.normal_force - 0.5).abs() < 1e-12);
}

#[test]
fn sliding_contact_sits_on_cone() {
    let mut c = Contact::fresh(LinkId(D1), 0, Vec2::zeros(), Vec2::new(1.0, 0.0), 0.001);
    // tangent is +y; object already dragged 1 mm and still sliding at 10 cm/s
    c.tangential_displacement = 0.001;
    let f = contact_force(
        &c,
        &Vec2::new(0.0, 0.1),
        &MaterialPair::VINYL,
        &soft(),
        1e-3,
    );
    assert!((f.normal_force - 5.0).abs() < 1e-12);
    assert!((f.tangential_force + 2.0).abs() < 1e-12);
    assert_eq!(f.state, TangentialState::Slip);
}

#[test]
fn wrench_sums() {
    assert_eq!(
        net_wrench(
            &ObjectState::at_rest(ObjectShape::Circle { diameter: 0.05 }, 0.0, 0.0, 0.1),
            &[]
        ),
        Wrench::default()
    );

    let obj = ObjectState::at_rest(ObjectShape::Circle { diameter: 0.06 }, 0.0, 0.0, 0.1);
    let mut a = Contact::fresh(
        LinkId(D1),
        0,
        Vec2::new(-0.03, 0.0),
        Vec2::new(1.0, 0.0),
        0.001,
    );
    a.normal_force = 5.0;
    let mut b = Contact::fresh(
        LinkId(D2),
        0,
        Vec2::new(0.03, 0.0),
        Vec2::new(-1.0, 0.0),
        0.001,
    );
    b.normal_force = 5.0;
    assert_eq!(net_wrench(&obj, &[a, b]), Wrench::default());

    // 5 N along +x applied 30 mm below the center: moment 0.15 N·m
    let mut c = Contact::fresh(
        LinkId(D1),
        0,
        Vec2::new(0.0, -0.03),
        Vec2::new(1.0, 0.0),
        0.001,
    );
    c.normal_force = 5.0;
    let w = net_wrench(&obj, &[c]);
    assert!((w.torque - 0.15).abs() < 1e-12);
}
