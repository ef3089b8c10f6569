//! Deterministic desk-scale world simulation.
//!
//! A [`Simulator`] owns the ground-truth [`WorldModel`], the robot state and
//! the seeded noise streams. Everything advances on a virtual clock, so a
//! world file, a command trace and a seed fully determine the run.

pub mod error;
pub mod geometry;
pub mod lidar;
pub mod noise;
pub mod robot;
pub mod sim;
pub mod world;

pub use error::WorldError;
pub use lidar::{simulate_scan, ScanParams};
pub use noise::{NoiseStreams, SensorNoise};
pub use robot::{integrate, read_odometry, step_robot, RobotState, StepOutcome};
pub use sim::{SimStep, Simulator, CONTROL_DT};
pub use world::{advance_world, Bounds, Obstacle, ObstacleScript, WorldModel};
