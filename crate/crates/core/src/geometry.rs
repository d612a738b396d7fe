//! Planar geometry helpers shared by kinematics and contact detection.

use nalgebra::Vector2;

pub type Vec2 = Vector2<f64>;

/// A line segment swept by a disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub a: Vec2,
    pub b: Vec2,
    pub radius: f64,
}

impl Capsule {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    /// Closest point on the core segment to `p`, with its parameter in [0, 1].
    pub fn closest_point(&self, p: &Vec2) -> (Vec2, f64) {
        closest_on_segment(&self.a, &self.b, p)
    }
}

pub fn closest_on_segment(a: &Vec2, b: &Vec2, p: &Vec2) -> (Vec2, f64) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (*a, 0.0);
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (a + ab * t, t)
}

/// z-component of the planar cross product.
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Counter-clockwise perpendicular.
pub fn perp(v: &Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

pub fn rotate(v: &Vec2, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}
