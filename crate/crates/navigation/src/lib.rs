//! Global navigation over an occupancy map: inflated costmap, cost-weighted
//! A* on the 8-connected grid, timer/event driven replanning and a
//! pure-pursuit follower.

pub mod costmap;
pub mod error;
pub mod follow;
pub mod planner;
pub mod replan;

pub use costmap::{build_costmap, inflation_cost, Costmap, InflationParams, INSCRIBED, LETHAL, UNKNOWN_COST};
pub use error::NavError;
pub use follow::{follow_path, goal_reached, FollowCommand, FollowerParams, GoalTolerance};
pub use planner::{astar, nearest_traversable, plan_shortest_path, PathCost, Plan, PlannerParams};
pub use replan::{ReplanReason, Replanner};
