use std::sync::Arc;

use log::warn;
use serde::Serialize;
use teleop_core::{PlanPath, Pose2D};

use crate::costmap::{Costmap, INSCRIBED};
use crate::error::NavError;
use crate::planner::{nearest_traversable, plan_shortest_path, Plan, PlannerParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplanReason {
    /// No path was held (first plan, or the previous attempt failed).
    Initial,
    /// A waypoint of the held path now sits on an inscribed or lethal cell.
    Blocked,
    /// The replan period elapsed.
    Timer,
    /// A different goal was requested.
    GoalChanged,
}

/// Keeps the current plan and decides when to recompute it.
#[derive(Debug, Clone)]
pub struct Replanner {
    pub params: PlannerParams,
    pub period: f64,
    current: Option<Arc<Plan>>,
    goal: Option<Pose2D>,
    last_plan_at: f64,
}

impl Replanner {
    pub const DEFAULT_PERIOD: f64 = 2.0;

    pub fn new(params: PlannerParams) -> Self {
        Self {
            params,
            period: Self::DEFAULT_PERIOD,
            current: None,
            goal: None,
            last_plan_at: f64::NEG_INFINITY,
        }
    }

    pub fn current(&self) -> Option<&Arc<Plan>> {
        self.current.as_ref()
    }

    pub fn current_path(&self) -> Option<&PlanPath> {
        self.current.as_deref().map(|p| &p.path)
    }

    pub fn clear(&mut self) {
        self.current = None;
        self.goal = None;
    }

    fn trigger(&self, c: &Costmap, goal: &Pose2D, now: f64) -> Option<ReplanReason> {
        let Some(plan) = &self.current else {
            return Some(ReplanReason::Initial);
        };
        if self.goal.as_ref() != Some(goal) {
            return Some(ReplanReason::GoalChanged);
        }
        let blocked = plan.path.waypoints.iter().any(|w| match c.geometry.world_to_grid(w.position()) {
            Ok(idx) => c.cost(idx) >= INSCRIBED,
            Err(_) => true,
        });
        if blocked {
            return Some(ReplanReason::Blocked);
        }
        if now - self.last_plan_at >= self.period {
            return Some(ReplanReason::Timer);
        }
        None
    }

    /// Returns the plan to follow, recomputing it when a waypoint became
    /// blocked, the period elapsed, or the goal changed. Otherwise the held
    /// plan is returned as-is (same allocation).
    ///
    /// On failure the held plan is dropped, so the next call retries.
    pub fn replan_if_needed(
        &mut self,
        c: &Costmap,
        pose: &Pose2D,
        goal: &Pose2D,
        now: f64,
    ) -> Result<(Arc<Plan>, Option<ReplanReason>), NavError> {
        let Some(reason) = self.trigger(c, goal, now) else {
            let plan = self.current.clone().expect("trigger is None only with a held plan");
            return Ok((plan, None));
        };
        match self.plan(c, pose, goal, now) {
            Ok(plan) => {
                let plan = Arc::new(plan);
                self.current = Some(plan.clone());
                self.goal = Some(*goal);
                self.last_plan_at = now;
                Ok((plan, Some(reason)))
            }
            Err(e) => {
                warn!("planning failed at t={now:.2}: {e}");
                self.current = None;
                self.goal = Some(*goal);
                Err(e)
            }
        }
    }

    fn plan(&self, c: &Costmap, pose: &Pose2D, goal: &Pose2D, now: f64) -> Result<Plan, NavError> {
        match plan_shortest_path(c, *pose, *goal, &self.params, now) {
            // Noisy maps can inflate over the robot itself; start from the
            // closest free cell instead and let the follower steer onto it.
            Err(NavError::StartInCollision) => {
                let cell = nearest_traversable(c, pose.position(), self.params.goal_search_radius)
                    .ok_or(NavError::StartInCollision)?;
                let p = c.geometry.cell_center(cell);
                plan_shortest_path(c, Pose2D::new(p.x, p.y, pose.theta), *goal, &self.params, now)
            }
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costmap::{FREE, LETHAL};
    use teleop_core::{GridGeometry, GridIndex};

    fn open(n: usize) -> Costmap {
        Costmap::from_costs(GridGeometry::new(0.1, n, n, Pose2D::default()), vec![FREE; n * n])
    }

    #[test]
    fn unchanged_map_within_period_keeps_same_plan() {
        let c = open(30);
        let mut r = Replanner::new(PlannerParams::default());
        let start = Pose2D::new(0.15, 0.15, 0.0);
        let goal = Pose2D::new(2.55, 2.55, 0.0);
        let (first, why) = r.replan_if_needed(&c, &start, &goal, 0.0).unwrap();
        assert_eq!(why, Some(ReplanReason::Initial));
        let (second, why) = r.replan_if_needed(&c, &start, &goal, 1.9).unwrap();
        assert_eq!(why, None);
        assert!(Arc::ptr_eq(&first, &second));
        let (_, why) = r.replan_if_needed(&c, &start, &goal, 2.0).unwrap();
        assert_eq!(why, Some(ReplanReason::Timer));
    }

    #[test]
    fn new_goal_replans_immediately() {
        let c = open(30);
        let mut r = Replanner::new(PlannerParams::default());
        let start = Pose2D::new(0.15, 0.15, 0.0);
        r.replan_if_needed(&c, &start, &Pose2D::new(2.55, 2.55, 0.0), 0.0).unwrap();
        let (plan, why) = r.replan_if_needed(&c, &start, &Pose2D::new(0.15, 2.55, 0.0), 0.1).unwrap();
        assert_eq!(why, Some(ReplanReason::GoalChanged));
        assert_eq!(plan.goal_cell, GridIndex::new(1, 25));
    }

    #[test]
    fn blocked_path_replans_around_obstacle() {
        let mut c = open(30);
        let mut r = Replanner::new(PlannerParams::default());
        let start = Pose2D::new(0.15, 1.55, 0.0);
        let goal = Pose2D::new(2.85, 1.55, 0.0);
        let (first, _) = r.replan_if_needed(&c, &start, &goal, 0.0).unwrap();
        assert!(first.cells.iter().all(|i| i.row == 15));
        // drop a block across the straight line
        let mut costs = c.costs().to_vec();
        for row in 12..=18 {
            costs[row * 30 + 15] = LETHAL;
        }
        c = Costmap::from_costs(c.geometry, costs);
        let (second, why) = r.replan_if_needed(&c, &start, &goal, 0.5).unwrap();
        assert_eq!(why, Some(ReplanReason::Blocked));
        assert!(second.cells.iter().all(|i| c.cost(*i) < INSCRIBED));
        assert!(second.cells.iter().any(|i| i.row < 12 || i.row > 18));
    }

    #[test]
    fn failure_drops_plan_and_retries() {
        let geo = GridGeometry::new(0.1, 10, 10, Pose2D::default());
        let mut costs = vec![FREE; 100];
        for row in 0..10 {
            costs[row * 10 + 5] = LETHAL;
        }
        let c = Costmap::from_costs(geo, costs);
        let mut r = Replanner::new(PlannerParams::default());
        let start = Pose2D::new(0.15, 0.15, 0.0);
        let goal = Pose2D::new(0.85, 0.15, 0.0);
        assert_eq!(r.replan_if_needed(&c, &start, &goal, 0.0).unwrap_err(), NavError::NoPath);
        assert!(r.current().is_none());
        assert_eq!(r.replan_if_needed(&c, &start, &goal, 0.02).unwrap_err(), NavError::NoPath);
    }

    #[test]
    fn start_inside_inflation_plans_from_nearest_free_cell() {
        let geo = GridGeometry::new(0.1, 10, 10, Pose2D::default());
        let mut costs = vec![FREE; 100];
        costs[0] = INSCRIBED;
        let c = Costmap::from_costs(geo, costs);
        let mut r = Replanner::new(PlannerParams::default());
        let (plan, _) = r
            .replan_if_needed(&c, &Pose2D::new(0.05, 0.05, 0.0), &Pose2D::new(0.85, 0.85, 0.0), 0.0)
            .unwrap();
        assert!(plan.cells.iter().all(|i| c.is_traversable(*i)));
    }
}
