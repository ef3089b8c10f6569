use serde::{Deserialize, Serialize};
use teleop_core::angle::angle_diff;
use teleop_core::{PlanPath, Pose2D, Twist, VelocityLimits};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GoalTolerance {
    pub position: f64,
    /// `None` for heading-agnostic goals.
    pub heading: Option<f64>,
}

impl Default for GoalTolerance {
    fn default() -> Self {
        Self {
            position: 0.10,
            heading: Some(0.35),
        }
    }
}

pub fn goal_reached(pose: &Pose2D, goal: &Pose2D, tol: &GoalTolerance) -> bool {
    if pose.distance(goal) > tol.position {
        return false;
    }
    match tol.heading {
        Some(max) => angle_diff(goal.theta, pose.theta).abs() <= max,
        None => true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FollowerParams {
    pub lookahead: f64,
    pub heading_gain: f64,
    pub limits: VelocityLimits,
    /// Distance to the final waypoint at which the follower stops.
    pub arrival_tolerance: f64,
}

impl Default for FollowerParams {
    fn default() -> Self {
        Self {
            lookahead: 0.3,
            heading_gain: 2.0,
            limits: VelocityLimits::default(),
            arrival_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowCommand {
    pub twist: Twist,
    pub goal_reached: bool,
}

/// Pure-pursuit step.
///
/// The target is the first waypoint at least `lookahead` further along the
/// path than the point closest to the robot (or the last waypoint). The robot
/// turns toward it proportionally to the heading error and slows with its
/// cosine, never reversing.
pub fn follow_path(pose: &Pose2D, path: &PlanPath, params: &FollowerParams) -> FollowCommand {
    let Some(last) = path.waypoints.last() else {
        return FollowCommand {
            twist: Twist::ZERO,
            goal_reached: false,
        };
    };
    if pose.distance(last) <= params.arrival_tolerance {
        return FollowCommand {
            twist: Twist::ZERO,
            goal_reached: true,
        };
    }
    let arcs = path.arc_lengths();
    let here = path.project(pose.position());
    let target = path
        .waypoints
        .iter()
        .zip(&arcs)
        .find(|(_, s)| **s >= here + params.lookahead)
        .map_or(*last, |(w, _)| *w);
    let err = angle_diff(pose.bearing_to(&target.position()), pose.theta);
    let twist = params.limits.clamp(Twist::new(
        params.limits.v_max * err.cos().max(0.0),
        params.heading_gain * err,
    ));
    FollowCommand {
        twist,
        goal_reached: false,
    }
}
