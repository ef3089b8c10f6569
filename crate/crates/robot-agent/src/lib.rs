//! The robot side of the teleoperation stack.
//!
//! [`RobotAgent`] owns the simulated robot and runs one 50 Hz control loop:
//! it drains envelopes delivered by the link, scores pings, decides between
//! operator control and autonomous navigation to the last goal, steps the
//! robot, and emits telemetry for the link.

pub mod agent;
pub mod config;
pub mod error;
pub mod mode;

pub use agent::{AgentEvent, RobotAgent, TickReport};
pub use config::AgentConfig;
pub use error::AgentError;
pub use mode::{handle_goal, supervise_tick, Action, ModeState, Transition, TransitionLog, TransitionReason};
