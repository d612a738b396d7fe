use sea_grasp::geometry::*;

#[test]
fn closest_point_clamps_to_ends() {
    let a = Vec2::new(0.0, 0.0);
    let b = Vec2::new(1.0, 0.0);
    assert_eq!(closest_on_segment(&a, &b, &Vec2::new(-1.0, 1.0)).0, a);
    assert_eq!(closest_on_segment(&a, &b, &Vec2::new(2.0, 1.0)).0, b);
    let (q, t) = closest_on_segment(&a, &b, &Vec2::new(0.25, 3.0));
    assert_eq!(q, Vec2::new(0.25, 0.0));
    assert_eq!(t, 0.25);
}

#[test]
fn degenerate_segment() {
    let a = Vec2::new(1.0, 1.0);
    assert_eq!(closest_on_segment(&a, &a, &Vec2::zeros()).0, a);
}

#[test]
fn rotate_quarter_turn() {
    let r = rotate(&Vec2::new(1.0, 0.0), std::f64::consts::FRAC_PI_2);
    assert!((r - Vec2::new(0.0, 1.0)).norm() < 1e-15);
    assert_eq!(perp(&Vec2::new(1.0, 0.0)), Vec2::new(0.0, 1.0));
    assert_eq!(cross(&Vec2::new(1.0, 0.0), &Vec2::new(0.0, 1.0)), 1.0);
}
