use serde::{Deserialize, Serialize};
use teleop_netlink::LinkStats;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCounts {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
}

impl From<LinkStats> for EnvelopeCounts {
    fn from(s: LinkStats) -> Self {
        Self {
            sent: s.sent,
            delivered: s.delivered,
            dropped: s.dropped,
        }
    }
}

/// Summary of one scenario run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub scenario: String,
    pub seed: u64,
    /// Simulated seconds covered by the run.
    pub duration: f64,
    /// From the last operator goal to the robot reporting it reached.
    pub time_to_goal: Option<f64>,
    pub goal_reached: bool,
    /// Ground-truth distance from the final pose to the last operator goal.
    pub final_goal_error: Option<f64>,
    /// Ground-truth distance driven.
    pub path_length: f64,
    pub mode_switches: u32,
    /// Twin pose jump at each reconnection, in order.
    pub teleport_distances: Vec<f64>,
    pub collision_count: u32,
    pub uplink: EnvelopeCounts,
    pub downlink: EnvelopeCounts,
    pub malformed: u64,
    pub goals_rejected: u32,
    /// Largest displacement of the displayed twin between two frames.
    pub max_frame_step: f64,
    /// Largest distance between the displayed twin and ground truth while
    /// the twin tracked live telemetry.
    pub max_twin_lag: f64,
    pub frames: u64,
}

impl RunMetrics {
    pub fn delivered(&self) -> u64 {
        self.uplink.delivered + self.downlink.delivered
    }

    pub fn dropped(&self) -> u64 {
        self.uplink.dropped + self.downlink.dropped
    }

    pub fn max_teleport(&self) -> f64 {
        self.teleport_distances.iter().copied().fold(0.0, f64::max)
    }
}
