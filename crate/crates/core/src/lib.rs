//! Planar simulator and proprioceptive grasp controllers for a two-finger,
//! four-joint gripper driven by series-elastic tendon actuators.

pub mod config;
pub mod contact;
pub mod control;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod mechanism;
pub mod plant;
pub mod sea;
pub mod validation;
pub mod world;
