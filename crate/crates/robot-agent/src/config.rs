use serde::{Deserialize, Serialize};
use teleop_mapping::{LogOddsParams, Thresholds};
use teleop_navigation::{FollowerParams, GoalTolerance, InflationParams, PlannerParams};
use teleop_netlink::PingMonitor;

use crate::error::AgentError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    /// Consecutive ping outcomes needed to flip connectivity.
    pub debounce_k: usize,
    pub ping_interval: f64,
    pub ping_timeout: f64,
    /// Operator commands older than this are ignored and the robot stops.
    pub deadman: f64,
    /// Follow the plan to the last goal in Remote mode when no operator
    /// command is fresh.
    pub remote_autonav: bool,
    pub goal_tolerance: GoalTolerance,
    pub follower: FollowerParams,
    pub planner: PlannerParams,
    /// Added to the world's robot radius to get the costmap's inscribed
    /// radius.
    pub footprint_padding: f64,
    pub inflation_radius: f64,
    pub inflation_decay: f64,
    pub map_resolution: f64,
    pub log_odds: LogOddsParams,
    pub p_occupied: f64,
    pub p_free: f64,
    pub odom_rate_hz: f64,
    pub map_rate_hz: f64,
    pub replan_period: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            debounce_k: 3,
            ping_interval: PingMonitor::DEFAULT_INTERVAL,
            ping_timeout: PingMonitor::DEFAULT_TIMEOUT,
            deadman: 0.15,
            remote_autonav: false,
            goal_tolerance: GoalTolerance {
                heading: None,
                ..GoalTolerance::default()
            },
            follower: FollowerParams::default(),
            planner: PlannerParams::default(),
            footprint_padding: 0.05,
            inflation_radius: 0.35,
            inflation_decay: 10.0,
            map_resolution: 0.05,
            log_odds: LogOddsParams::default(),
            p_occupied: 0.65,
            p_free: 0.25,
            odom_rate_hz: 10.0,
            map_rate_hz: 1.0,
            replan_period: 2.0,
        }
    }
}

impl AgentConfig {
    pub fn thresholds(&self) -> Result<Thresholds, AgentError> {
        Thresholds::new(self.p_occupied, self.p_free).map_err(|e| AgentError::Config(e.to_string()))
    }

    pub fn inflation(&self, robot_radius: f64) -> InflationParams {
        InflationParams {
            robot_radius: robot_radius + self.footprint_padding,
            inflation_radius: self.inflation_radius.max(robot_radius + self.footprint_padding),
            decay: self.inflation_decay,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        self.thresholds()?;
        let positive = [
            ("ping_interval", self.ping_interval),
            ("ping_timeout", self.ping_timeout),
            ("deadman", self.deadman),
            ("map_resolution", self.map_resolution),
            ("odom_rate_hz", self.odom_rate_hz),
            ("map_rate_hz", self.map_rate_hz),
            ("replan_period", self.replan_period),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(AgentError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.ping_timeout >= self.ping_interval {
            return Err(AgentError::Config("ping_timeout must be below ping_interval".into()));
        }
        if self.debounce_k == 0 {
            return Err(AgentError::Config("debounce_k must be at least 1".into()));
        }
        if self.footprint_padding < 0.0 {
            return Err(AgentError::Config("footprint_padding must be >= 0".into()));
        }
        Ok(())
    }
}
