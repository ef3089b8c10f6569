//! Shared building blocks for the teleoperation stack.
//!
//! Every other crate in the workspace speaks in terms of the types defined
//! here: planar poses and velocity commands, grid indexing, the closed set of
//! topics and their message payloads, and an in-process publish/subscribe bus.

pub mod angle;
pub mod bus;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod msg;

pub use angle::normalize_angle;
pub use bus::{Bus, Publisher, Subscription};
pub use error::{CoreError, GridError};
pub use geometry::{Point2, Pose2D, Twist, VelocityLimits};
pub use grid::{raster_line, world_to_grid, GridGeometry, GridIndex};
pub use msg::{
    Envelope, GoalMsg, LaserScan, MapHeader, Mode, ModeMsg, OccupancyMsg, OdomMsg, Payload,
    PingMsg, PlanPath, PongMsg, Topic,
};
