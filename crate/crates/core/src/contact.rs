//! Objects, capsule-versus-object contact detection and penalty contact
//! forces with elastic stick/slip Coulomb friction.

use serde::{Deserialize, Serialize};

use crate::geometry::{closest_on_segment, cross, perp, rotate, Capsule, Vec2};
use crate::mechanism::{Finger, LinkId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectShape {
    Circle { diameter: f64 },
    SquareBox { side: f64 },
}

impl ObjectShape {
    pub fn dimension(&self) -> f64 {
        match *self {
            ObjectShape::Circle { diameter } => diameter,
            ObjectShape::SquareBox { side } => side,
        }
    }

    /// Moment of inertia about the centroid for a uniform lamina.
    pub fn uniform_inertia(&self, mass: f64) -> f64 {
        match *self {
            ObjectShape::Circle { diameter } => mass * diameter * diameter / 8.0,
            ObjectShape::SquareBox { side } => mass * side * side / 6.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        let d = self.dimension();
        d.is_finite() && d > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2 {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist2 {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl Twist2 {
    pub fn linear(&self) -> Vec2 {
        Vec2::new(self.vx, self.vy)
    }

    /// Velocity of a point rigidly attached to the body.
    pub fn point_velocity(&self, center: &Vec2, point: &Vec2) -> Vec2 {
        self.linear() + perp(&(point - center)) * self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub shape: ObjectShape,
    pub pose: Pose2,
    pub velocity: Twist2,
    pub mass: f64,
    pub inertia: f64,
}

impl ObjectState {
    /// Object at rest with uniform density.
    pub fn at_rest(shape: ObjectShape, x: f64, y: f64, mass: f64) -> Self {
        Self {
            shape,
            pose: Pose2 { x, y, heading: 0.0 },
            velocity: Twist2::default(),
            mass,
            inertia: shape.uniform_inertia(mass),
        }
    }

    pub fn speed(&self) -> f64 {
        self.velocity.linear().norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TangentialState {
    Stick,
    Slip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialPair {
    pub mu: f64,
}

impl MaterialPair {
    pub const RUBBER: MaterialPair = MaterialPair { mu: 1.2 };
    pub const VINYL: MaterialPair = MaterialPair { mu: 0.4 };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyParams {
    /// Normal stiffness, N/m.
    pub kn: f64,
    /// Normal damping on approach, N·s/m.
    pub cn: f64,
    /// Tangential (stiction) stiffness, N/m.
    pub kt: f64,
    /// Tangential damping, N·s/m.
    pub ct: f64,
    /// Relative tangential speed above which a saturated contact counts as
    /// sliding, m/s.
    pub slip_velocity: f64,
}

impl Default for PenaltyParams {
    fn default() -> Self {
        Self {
            kn: 10000.0,
            cn: 5.0,
            kt: 5000.0,
            ct: 5.0,
            slip_velocity: 0.001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub link: LinkId,
    /// Which feature pair of the link produced the contact; friction state
    /// carries over per (link, feature).
    pub feature: u8,
    /// Midpoint of the overlap, world frame.
    pub point: Vec2,
    /// Unit normal pointing from the link into the object.
    pub normal: Vec2,
    pub depth: f64,
    pub tangential_state: TangentialState,
    /// Accumulated elastic tangential displacement along `tangent()`, m.
    pub tangential_displacement: f64,
    /// Force on the object, normal component, N.
    pub normal_force: f64,
    /// Force on the object along `tangent()`, N.
    pub tangential_force: f64,
}

impl Contact {
    pub fn fresh(link: LinkId, feature: u8, point: Vec2, normal: Vec2, depth: f64) -> Self {
        Self {
            link,
            feature,
            point,
            normal,
            depth,
            tangential_state: TangentialState::Stick,
            tangential_displacement: 0.0,
            normal_force: 0.0,
            tangential_force: 0.0,
        }
    }

    pub fn tangent(&self) -> Vec2 {
        perp(&self.normal)
    }

    /// Force this contact applies to the object.
    pub fn force_on_object(&self) -> Vec2 {
        self.normal * self.normal_force + self.tangent() * self.tangential_force
    }
}

/// Contacts between each link capsule and the object. A circle gives at
/// most one contact per link; a box gives one per penetrating feature
/// (segment end against the box, box corner against the segment), so a
/// link lying flush on a face is supported at both ends.
pub fn detect_contacts(capsules: &[Capsule; 4], object: &ObjectState) -> Vec<Contact> {
    let mut out = Vec::new();
    for link in LinkId::ALL {
        let cap = &capsules[link.0];
        match object.shape {
            ObjectShape::Circle { diameter } => {
                if let Some((point, normal, depth)) =
                    capsule_circle(cap, &object.pose.position(), diameter / 2.0)
                {
                    out.push(Contact::fresh(link, 0, point, normal, depth));
                }
            }
            ObjectShape::SquareBox { side } => {
                for (feature, point, normal, depth) in capsule_box(cap, &object.pose, side / 2.0) {
                    out.push(Contact::fresh(link, feature, point, normal, depth));
                }
            }
        }
    }
    out
}

fn capsule_circle(cap: &Capsule, center: &Vec2, radius: f64) -> Option<(Vec2, Vec2, f64)> {
    let (q, _) = cap.closest_point(center);
    let offset = center - q;
    let dist = offset.norm();
    let depth = radius + cap.radius - dist;
    if depth <= 0.0 {
        return None;
    }
    let normal = if dist > 0.0 {
        offset / dist
    } else {
        // Center on the core segment: push along the segment normal.
        let axis = cap.b - cap.a;
        perp(&axis).normalize()
    };
    Some((q + normal * (cap.radius - depth / 2.0), normal, depth))
}

const FEATURE_END_A: u8 = 1;
const FEATURE_END_B: u8 = 2;
const FEATURE_CORNER: u8 = 3;

/// Capsule against a square of half-side `h`, worked in the box frame.
fn capsule_box(cap: &Capsule, pose: &Pose2, h: f64) -> Vec<(u8, Vec2, Vec2, f64)> {
    let center = pose.position();
    let to_local = |p: &Vec2| rotate(&(p - center), -pose.heading);
    let to_world = |p: &Vec2, n: &Vec2, feature: u8, depth: f64| {
        (
            feature,
            center + rotate(p, pose.heading),
            rotate(n, pose.heading),
            depth,
        )
    };
    let a = to_local(&cap.a);
    let b = to_local(&cap.b);
    let r = cap.radius;

    if segment_hits_box(&a, &b, h) {
        let (p, n, d) = deep_box_contact(&a, &b, h, r);
        return vec![to_world(&p, &n, 0, d)];
    }
    let mut out = Vec::new();
    // midway between the capsule surface and the box surface
    let place = |from: &Vec2, n: &Vec2, dist: f64| from + n * ((r + dist) / 2.0);
    for (feature, end) in [(FEATURE_END_A, a), (FEATURE_END_B, b)] {
        let on_box = Vec2::new(end.x.clamp(-h, h), end.y.clamp(-h, h));
        // a corner as closest point is covered by the corner feature
        if on_box.x.abs() == h && on_box.y.abs() == h {
            continue;
        }
        let dist = (on_box - end).norm();
        if dist < r && dist > 0.0 {
            let n = (on_box - end) / dist;
            out.push(to_world(&place(&end, &n, dist), &n, feature, r - dist));
        }
    }
    let corners = [
        Vec2::new(-h, -h),
        Vec2::new(h, -h),
        Vec2::new(h, h),
        Vec2::new(-h, h),
    ];
    for (i, corner) in corners.iter().enumerate() {
        let (q, _) = closest_on_segment(&a, &b, corner);
        let dist = (corner - q).norm();
        if dist < r {
            let n = if dist > 0.0 {
                (corner - q) / dist
            } else {
                let s = perp(&(b - a)).normalize();
                if s.dot(&-q) >= 0.0 {
                    s
                } else {
                    -s
                }
            };
            out.push(to_world(
                &place(&q, &n, dist),
                &n,
                FEATURE_CORNER + i as u8,
                r - dist,
            ));
        }
    }
    out
}

fn segment_hits_box(a: &Vec2, b: &Vec2, h: f64) -> bool {
    // Liang-Barsky clip against the square.
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-d.x, a.x + h),
        (d.x, h - a.x),
        (-d.y, a.y + h),
        (d.y, h - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Core segment inside the box: separate along the axis of least overlap.
fn deep_box_contact(a: &Vec2, b: &Vec2, h: f64, r: f64) -> (Vec2, Vec2, f64) {
    let seg_normal = {
        let d = b - a;
        if d.norm() > 0.0 {
            perp(&d).normalize()
        } else {
            Vec2::new(1.0, 0.0)
        }
    };
    let corners = [
        Vec2::new(-h, -h),
        Vec2::new(h, -h),
        Vec2::new(h, h),
        Vec2::new(-h, h),
    ];
    let mut best: Option<(f64, Vec2)> = None;
    for axis in [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), seg_normal] {
        let (bmin, bmax) = corners.iter().fold((f64::MAX, f64::MIN), |(lo, hi), c| {
            let v = c.dot(&axis);
            (lo.min(v), hi.max(v))
        });
        let (smin, smax) = (
            a.dot(&axis).min(b.dot(&axis)) - r,
            a.dot(&axis).max(b.dot(&axis)) + r,
        );
        // push the link toward -axis or +axis
        for (overlap, dir) in [(smax - bmin, axis), (bmax - smin, -axis)] {
            if best.is_none_or(|(o, _)| overlap < o) {
                best = Some((overlap, dir));
            }
        }
    }
    let (depth, normal) = best.expect("three axes considered");
    // deepest point of the segment along the normal
    let p = if a.dot(&normal) >= b.dot(&normal) {
        *a
    } else {
        *b
    };
    (p + normal * (r - depth / 2.0), normal, depth.max(0.0))
}

/// Result of evaluating one contact's penalty force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactForce {
    pub normal_force: f64,
    pub tangential_force: f64,
    pub tangential_displacement: f64,
    pub state: TangentialState,
}

/// Penalty normal force and elastic Coulomb friction. `relative_velocity`
/// is the object's point velocity minus the link's at the contact.
pub fn contact_force(
    contact: &Contact,
    relative_velocity: &Vec2,
    pair: &MaterialPair,
    penalty: &PenaltyParams,
    dt: f64,
) -> ContactForce {
    let approach = -relative_velocity.dot(&contact.normal);
    let normal_force =
        (penalty.kn * contact.depth.max(0.0) + penalty.cn * approach.max(0.0)).max(0.0);

    let vt = relative_velocity.dot(&contact.tangent());
    let displacement = contact.tangential_displacement + vt * dt;
    let trial = -penalty.kt * displacement - penalty.ct * vt;
    let limit = pair.mu * normal_force;
    if trial.abs() <= limit {
        ContactForce {
            normal_force,
            tangential_force: trial,
            tangential_displacement: displacement,
            state: TangentialState::Stick,
        }
    } else {
        let tangential_force = limit.copysign(trial);
        let sliding = vt.abs() > penalty.slip_velocity;
        ContactForce {
            normal_force,
            tangential_force,
            tangential_displacement: -tangential_force / penalty.kt,
            state: if sliding {
                TangentialState::Slip
            } else {
                TangentialState::Stick
            },
        }
    }
}

/// Net force and moment on the object about its center from all contacts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    pub fx: f64,
    pub fy: f64,
    pub torque: f64,
}

impl Wrench {
    pub fn within(&self, limit: &Wrench) -> bool {
        self.fx.abs() <= limit.fx && self.fy.abs() <= limit.fy && self.torque.abs() <= limit.torque
    }
}

pub fn net_wrench(object: &ObjectState, contacts: &[Contact]) -> Wrench {
    // Summing per finger first keeps mirror-image grasps exactly balanced.
    let center = object.pose.position();
    let finger_sum = |finger: Finger| {
        contacts
            .iter()
            .filter(|c| c.link.finger() == finger)
            .fold(Wrench::default(), |acc, c| {
                let f = c.force_on_object();
                Wrench {
                    fx: acc.fx + f.x,
                    fy: acc.fy + f.y,
                    torque: acc.torque + cross(&(c.point - center), &f),
                }
            })
    };
    let (a, b) = (finger_sum(Finger::First), finger_sum(Finger::Second));
    Wrench {
        fx: a.fx + b.fx,
        fy: a.fy + b.fy,
        torque: a.torque + b.torque,
    }
}

/// Points where the object dips below the palm line `y = palm_y`, with
/// their depths. The palm is a fixed, frictionless wall.
pub fn palm_penetrations(object: &ObjectState, palm_y: f64) -> Vec<(Vec2, f64)> {
    let center = object.pose.position();
    match object.shape {
        ObjectShape::Circle { diameter } => {
            let depth = palm_y - (center.y - diameter / 2.0);
            if depth > 0.0 {
                vec![(Vec2::new(center.x, palm_y - depth / 2.0), depth)]
            } else {
                vec![]
            }
        }
        ObjectShape::SquareBox { side } => {
            let h = side / 2.0;
            [
                Vec2::new(-h, -h),
                Vec2::new(h, -h),
                Vec2::new(h, h),
                Vec2::new(-h, h),
            ]
            .iter()
            .map(|c| center + rotate(c, object.pose.heading))
            .filter(|p| p.y < palm_y)
            .map(|p| (p, palm_y - p.y))
            .collect()
        }
    }
}
