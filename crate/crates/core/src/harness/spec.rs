use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::{MaterialPair, ObjectShape};

#[derive(Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("unrecognised {what} '{value}'")]
    Unrecognised { what: &'static str, value: String },
    #[error("the physically underactuated gripper takes no initial distal pose")]
    PoseOnUnderactuated,
    #[error("fully actuated trials need an initial distal pose")]
    MissingPose,
    #[error("invalid trial: {0}")]
    Invalid(&'static str),
}

fn unrecognised(what: &'static str, value: &str) -> SpecError {
    SpecError::Unrecognised {
        what,
        value: value.to_string(),
    }
}

/// Squeeze controller used inside the enveloping suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SqueezeController {
    Mimo,
    FixedRatio { ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ControllerKind {
    Mimo,
    FixedRatio {
        ratio: f64,
    },
    /// Physically underactuated gripper with the given pulley ratio.
    PhysUa {
        ratio: f64,
    },
    /// MIMO fingertip grasp followed by a switch to fixed ratio torques.
    Transition,
    Enveloping(SqueezeController),
}

impl ControllerKind {
    pub fn is_underactuated(&self) -> bool {
        matches!(self, ControllerKind::PhysUa { .. })
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControllerKind::Mimo => write!(f, "mimo"),
            ControllerKind::FixedRatio { ratio } => write!(f, "fixed_ratio_{ratio}"),
            ControllerKind::PhysUa { ratio } => write!(f, "phys_ua_{ratio}"),
            ControllerKind::Transition => write!(f, "transition"),
            ControllerKind::Enveloping(SqueezeController::Mimo) => write!(f, "enveloping_mimo"),
            ControllerKind::Enveloping(SqueezeController::FixedRatio { ratio }) => {
                write!(f, "enveloping_fixed_ratio_{ratio}")
            }
        }
    }
}

fn parse_ratio(s: &str, original: &str) -> Result<f64, SpecError> {
    match s.parse::<f64>() {
        Ok(r) if r.is_finite() && r > 0.0 => Ok(r),
        _ => Err(unrecognised("controller", original)),
    }
}

impl FromStr for ControllerKind {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "mimo" => ControllerKind::Mimo,
            "transition" => ControllerKind::Transition,
            "enveloping_mimo" => ControllerKind::Enveloping(SqueezeController::Mimo),
            _ => {
                if let Some(r) = s.strip_prefix("enveloping_fixed_ratio_") {
                    ControllerKind::Enveloping(SqueezeController::FixedRatio {
                        ratio: parse_ratio(r, s)?,
                    })
                } else if let Some(r) = s.strip_prefix("fixed_ratio_") {
                    ControllerKind::FixedRatio {
                        ratio: parse_ratio(r, s)?,
                    }
                } else if let Some(r) = s.strip_prefix("phys_ua_") {
                    ControllerKind::PhysUa {
                        ratio: parse_ratio(r, s)?,
                    }
                } else {
                    return Err(unrecognised("controller", s));
                }
            }
        })
    }
}

impl From<ControllerKind> for String {
    fn from(c: ControllerKind) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for ControllerKind {
    type Error = SpecError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Test object, dimensions in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ObjectKind {
    Circle { diameter_mm: f64 },
    Box { side_mm: f64 },
}

impl ObjectKind {
    pub const BIG_CYLINDER: ObjectKind = ObjectKind::Circle { diameter_mm: 67.0 };
    pub const BIG_BOX: ObjectKind = ObjectKind::Box { side_mm: 57.0 };
    pub const SMALL_CYLINDER: ObjectKind = ObjectKind::Circle { diameter_mm: 47.0 };
    pub const SMALL_BOX: ObjectKind = ObjectKind::Box { side_mm: 39.0 };
    pub const STANDARD_SET: [ObjectKind; 4] = [
        Self::BIG_CYLINDER,
        Self::BIG_BOX,
        Self::SMALL_CYLINDER,
        Self::SMALL_BOX,
    ];

    pub fn shape(&self) -> ObjectShape {
        match *self {
            ObjectKind::Circle { diameter_mm } => ObjectShape::Circle {
                diameter: diameter_mm * 1e-3,
            },
            ObjectKind::Box { side_mm } => ObjectShape::SquareBox {
                side: side_mm * 1e-3,
            },
        }
    }

    pub fn size_mm(&self) -> f64 {
        match *self {
            ObjectKind::Circle { diameter_mm } => diameter_mm,
            ObjectKind::Box { side_mm } => side_mm,
        }
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectKind::Circle { diameter_mm } => write!(f, "circle_{diameter_mm}"),
            ObjectKind::Box { side_mm } => write!(f, "box_{side_mm}"),
        }
    }
}

impl FromStr for ObjectKind {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let size = |v: &str| match v.parse::<f64>() {
            Ok(d) if d.is_finite() && d > 0.0 => Ok(d),
            _ => Err(unrecognised("object", s)),
        };
        if let Some(d) = s.strip_prefix("circle_") {
            Ok(ObjectKind::Circle {
                diameter_mm: size(d)?,
            })
        } else if let Some(d) = s.strip_prefix("box_") {
            Ok(ObjectKind::Box { side_mm: size(d)? })
        } else {
            Err(unrecognised("object", s))
        }
    }
}

impl From<ObjectKind> for String {
    fn from(o: ObjectKind) -> String {
        o.to_string()
    }
}

impl TryFrom<String> for ObjectKind {
    type Error = SpecError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Friction {
    Rubber,
    Vinyl,
}

impl Friction {
    pub fn pair(self) -> MaterialPair {
        match self {
            Friction::Rubber => MaterialPair::RUBBER,
            Friction::Vinyl => MaterialPair::VINYL,
        }
    }
}

impl fmt::Display for Friction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Friction::Rubber => "rubber",
            Friction::Vinyl => "vinyl",
        })
    }
}

impl FromStr for Friction {
    type Err = SpecError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rubber" => Ok(Friction::Rubber),
            "vinyl" => Ok(Friction::Vinyl),
            _ => Err(unrecognised("friction", s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub controller: ControllerKind,
    pub object: ObjectKind,
    /// Object center distance from the palm, mm.
    pub location_mm: f64,
    /// Distal pre-shape, degrees. Absent for the underactuated gripper.
    pub initial_distal_deg: Option<f64>,
    pub friction: Friction,
    pub seed: u64,
}

impl TrialSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        match (self.controller.is_underactuated(), self.initial_distal_deg) {
            (true, Some(_)) => return Err(SpecError::PoseOnUnderactuated),
            (false, None) => return Err(SpecError::MissingPose),
            (_, Some(d)) if !d.is_finite() => {
                return Err(SpecError::Invalid("initial pose must be finite"))
            }
            _ => {}
        }
        if !(self.location_mm.is_finite() && self.location_mm > 0.0) {
            return Err(SpecError::Invalid("location must be > 0 mm"));
        }
        if !(self.object.size_mm().is_finite() && self.object.size_mm() > 0.0) {
            return Err(SpecError::Invalid("object size must be > 0 mm"));
        }
        if let ControllerKind::FixedRatio { ratio }
        | ControllerKind::PhysUa { ratio }
        | ControllerKind::Enveloping(SqueezeController::FixedRatio { ratio }) = self.controller
        {
            if !(ratio.is_finite() && ratio > 0.0) {
                return Err(SpecError::Invalid("torque ratio must be > 0"));
            }
        }
        Ok(())
    }
}

pub const FINGERTIP_LOCATIONS_MM: [f64; 3] = [100.0, 120.0, 140.0];
pub const ENVELOPING_LOCATIONS_MM: [f64; 2] = [60.0, 80.0];
pub const INITIAL_POSES_DEG: [f64; 3] = [0.0, 30.0, 60.0];
pub const BASELINE_RATIOS: [f64; 3] = [0.3, 0.4, 0.5];

/// Fully actuated {MIMO, three fixed ratios} over every object, location,
/// pose and friction, plus the underactuated gripper at the same ratios
/// without the pose dimension.
pub fn default_matrix(repetitions: u32, base_seed: u64) -> Vec<TrialSpec> {
    let mut out = Vec::new();
    let fully: Vec<ControllerKind> = std::iter::once(ControllerKind::Mimo)
        .chain(
            BASELINE_RATIOS
                .iter()
                .map(|&ratio| ControllerKind::FixedRatio { ratio }),
        )
        .collect();
    let frictions = [Friction::Rubber, Friction::Vinyl];
    for rep in 0..repetitions as u64 {
        let seed = base_seed + rep;
        for &controller in &fully {
            for object in ObjectKind::STANDARD_SET {
                for location_mm in FINGERTIP_LOCATIONS_MM {
                    for pose in INITIAL_POSES_DEG {
                        for friction in frictions {
                            out.push(TrialSpec {
                                controller,
                                object,
                                location_mm,
                                initial_distal_deg: Some(pose),
                                friction,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        for ratio in BASELINE_RATIOS {
            for object in ObjectKind::STANDARD_SET {
                for location_mm in FINGERTIP_LOCATIONS_MM {
                    for friction in frictions {
                        out.push(TrialSpec {
                            controller: ControllerKind::PhysUa { ratio },
                            object,
                            location_mm,
                            initial_distal_deg: None,
                            friction,
                            seed,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Big objects near the palm, straight fingers, MIMO against fixed ratio 0.5.
/// Distal joints start curled so the fingers cage objects sitting deep in the hand.
pub const ENVELOPING_PRESHAPE_DEG: f64 = 60.0;

pub fn enveloping_matrix(seed: u64) -> Vec<TrialSpec> {
    let mut out = Vec::new();
    for object in [ObjectKind::BIG_CYLINDER, ObjectKind::BIG_BOX] {
        for location_mm in ENVELOPING_LOCATIONS_MM {
            for inner in [
                SqueezeController::Mimo,
                SqueezeController::FixedRatio { ratio: 0.5 },
            ] {
                out.push(TrialSpec {
                    controller: ControllerKind::Enveloping(inner),
                    object,
                    location_mm,
                    initial_distal_deg: Some(ENVELOPING_PRESHAPE_DEG),
                    friction: Friction::Rubber,
                    seed,
                });
            }
        }
    }
    out
}

/// Fingertip grasps of the big objects on low friction pads, then transition.
pub fn transition_matrix(seed: u64) -> Vec<TrialSpec> {
    let mut out = Vec::new();
    for object in [ObjectKind::BIG_CYLINDER, ObjectKind::BIG_BOX] {
        for location_mm in FINGERTIP_LOCATIONS_MM {
            for pose in INITIAL_POSES_DEG {
                out.push(TrialSpec {
                    controller: ControllerKind::Transition,
                    object,
                    location_mm,
                    initial_distal_deg: Some(pose),
                    friction: Friction::Vinyl,
                    seed,
                });
            }
        }
    }
    out
}
