//! Topic registry and message payloads.
//!
//! The registry is closed: a topic name outside [`Topic::ALL`] is rejected at
//! publish and subscribe time.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::geometry::{Point2, Pose2D, Twist};
use crate::grid::GridGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Topic {
    Scan,
    Odom,
    Map,
    CmdVel,
    Goal,
    Plan,
    Mode,
    Ping,
    Pong,
}

impl Topic {
    pub const ALL: [Topic; 9] = [
        Topic::Scan,
        Topic::Odom,
        Topic::Map,
        Topic::CmdVel,
        Topic::Goal,
        Topic::Plan,
        Topic::Mode,
        Topic::Ping,
        Topic::Pong,
    ];

    pub const fn as_str(&self) -> &'static str {
        match self {
            Topic::Scan => "/scan",
            Topic::Odom => "/odom",
            Topic::Map => "/map",
            Topic::CmdVel => "/cmd_vel",
            Topic::Goal => "/move_base_simple/goal",
            Topic::Plan => "/plan",
            Topic::Mode => "/mode",
            Topic::Ping => "/ping",
            Topic::Pong => "/pong",
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topic {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Topic::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| CoreError::UnknownTopic(s.to_string()))
    }
}

impl Serialize for Topic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Topic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One 360° range sweep. Readings above `range_max` mean "no return".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserScan {
    pub stamp: f64,
    pub angle_min: f64,
    pub angle_increment: f64,
    pub range_min: f64,
    pub range_max: f64,
    pub ranges: Vec<f64>,
}

impl LaserScan {
    pub const DEFAULT_SAMPLES: usize = 1147;
    pub const DEFAULT_RANGE_MIN: f64 = 0.15;
    pub const DEFAULT_RANGE_MAX: f64 = 12.0;

    /// Value stored for a ray without a usable return.
    pub fn no_return(&self) -> f64 {
        self.range_max + 1.0
    }

    pub fn is_return(&self, r: f64) -> bool {
        r >= self.range_min && r <= self.range_max
    }

    /// Bearing of ray `i` relative to the sensor heading.
    pub fn bearing(&self, i: usize) -> f64 {
        self.angle_min + i as f64 * self.angle_increment
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdomMsg {
    pub pose: Pose2D,
    pub twist: Twist,
}

/// Navigation goal. The frame is always `"map"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalMsg {
    pub stamp: f64,
    pub frame: String,
    pub pose: Pose2D,
}

impl GoalMsg {
    pub const FRAME: &'static str = "map";

    pub fn new(stamp: f64, pose: Pose2D) -> Self {
        Self {
            stamp,
            frame: Self::FRAME.to_string(),
            pose,
        }
    }
}

pub type MapHeader = GridGeometry;

/// Tri-state map export: -1 unknown, 0 free, 100 occupied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyMsg {
    pub header: MapHeader,
    pub cells: Vec<i8>,
}

impl OccupancyMsg {
    pub const UNKNOWN: i8 = -1;
    pub const FREE: i8 = 0;
    pub const OCCUPIED: i8 = 100;
}

/// Planned route as cell-center waypoints. Each heading points at the next
/// waypoint; the last one repeats its predecessor's heading. An empty path
/// means "no active plan".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanPath {
    pub stamp: f64,
    pub waypoints: Vec<Pose2D>,
}

impl PlanPath {
    pub fn from_points(stamp: f64, points: &[Point2], final_heading: f64) -> Self {
        let mut waypoints = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            let theta = match points.get(i + 1) {
                Some(n) => (n.y - p.y).atan2(n.x - p.x),
                None if i > 0 => waypoints.last().map_or(final_heading, |w: &Pose2D| w.theta),
                None => final_heading,
            };
            waypoints.push(Pose2D::new(p.x, p.y, theta));
        }
        Self { stamp, waypoints }
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    /// Cumulative arc length at each waypoint.
    pub fn arc_lengths(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.waypoints.len());
        for (i, w) in self.waypoints.iter().enumerate() {
            if i > 0 {
                acc += self.waypoints[i - 1].distance(w);
            }
            out.push(acc);
        }
        out
    }

    pub fn length(&self) -> f64 {
        self.arc_lengths().last().copied().unwrap_or(0.0)
    }

    /// Arc length of the point on the polyline closest to `p`. Ties resolve
    /// to the earliest segment.
    pub fn project(&self, p: Point2) -> f64 {
        let Some(first) = self.waypoints.first() else {
            return 0.0;
        };
        let arcs = self.arc_lengths();
        let mut best = (first.position().distance(&p), 0.0);
        for (i, seg) in self.waypoints.windows(2).enumerate() {
            let (a, b) = (seg[0].position(), seg[1].position());
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len2 = dx * dx + dy * dy;
            if len2 == 0.0 {
                continue;
            }
            let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
            let q = a.lerp(&b, t);
            let d = q.distance(&p);
            if d < best.0 {
                best = (d, arcs[i] + t * len2.sqrt());
            }
        }
        best.1
    }

    /// Pose at arc length `s`, clamped to the path ends. Heading follows the
    /// segment being traversed.
    pub fn pose_at(&self, s: f64) -> Option<Pose2D> {
        let first = *self.waypoints.first()?;
        if s <= 0.0 || self.waypoints.len() == 1 {
            return Some(first);
        }
        let arcs = self.arc_lengths();
        for i in 1..self.waypoints.len() {
            if s <= arcs[i] {
                let seg = arcs[i] - arcs[i - 1];
                let a = self.waypoints[i - 1];
                let b = self.waypoints[i];
                let t = if seg > 0.0 { (s - arcs[i - 1]) / seg } else { 1.0 };
                let p = a.position().lerp(&b.position(), t);
                return Some(Pose2D::new(p.x, p.y, a.theta));
            }
        }
        self.waypoints.last().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Remote,
    Autonomous,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Remote => "REMOTE",
            Mode::Autonomous => "AUTONOMOUS",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeMsg {
    pub mode: Mode,
    pub since: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PingMsg {
    pub seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PongMsg {
    pub seq: u64,
    pub code: u8,
}

/// Typed payload; each variant belongs to exactly one topic.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Scan(LaserScan),
    Odom(OdomMsg),
    Map(OccupancyMsg),
    CmdVel(Twist),
    Goal(GoalMsg),
    Plan(PlanPath),
    Mode(ModeMsg),
    Ping(PingMsg),
    Pong(PongMsg),
}

impl Payload {
    pub fn topic(&self) -> Topic {
        match self {
            Payload::Scan(_) => Topic::Scan,
            Payload::Odom(_) => Topic::Odom,
            Payload::Map(_) => Topic::Map,
            Payload::CmdVel(_) => Topic::CmdVel,
            Payload::Goal(_) => Topic::Goal,
            Payload::Plan(_) => Topic::Plan,
            Payload::Mode(_) => Topic::Mode,
            Payload::Ping(_) => Topic::Ping,
            Payload::Pong(_) => Topic::Pong,
        }
    }

    fn to_value(&self) -> Result<serde_json::Value, serde_json::Error> {
        match self {
            Payload::Scan(m) => serde_json::to_value(m),
            Payload::Odom(m) => serde_json::to_value(m),
            Payload::Map(m) => serde_json::to_value(m),
            Payload::CmdVel(m) => serde_json::to_value(m),
            Payload::Goal(m) => serde_json::to_value(m),
            Payload::Plan(m) => serde_json::to_value(m),
            Payload::Mode(m) => serde_json::to_value(m),
            Payload::Ping(m) => serde_json::to_value(m),
            Payload::Pong(m) => serde_json::to_value(m),
        }
    }

    fn from_value(topic: Topic, v: serde_json::Value) -> Result<Self, serde_json::Error> {
        use serde_json::from_value;
        Ok(match topic {
            Topic::Scan => Payload::Scan(from_value(v)?),
            Topic::Odom => Payload::Odom(from_value(v)?),
            Topic::Map => Payload::Map(from_value(v)?),
            Topic::CmdVel => Payload::CmdVel(from_value(v)?),
            Topic::Goal => Payload::Goal(from_value(v)?),
            Topic::Plan => Payload::Plan(from_value(v)?),
            Topic::Mode => Payload::Mode(from_value(v)?),
            Topic::Ping => Payload::Ping(from_value(v)?),
            Topic::Pong => Payload::Pong(from_value(v)?),
        })
    }
}

/// Topic-addressed message unit crossing the bus and the link.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub topic: Topic,
    pub seq: u64,
    pub stamp: f64,
    pub payload: Payload,
}

#[derive(Serialize, Deserialize)]
struct WireEnvelope {
    topic: String,
    seq: u64,
    stamp: f64,
    payload: serde_json::Value,
}

impl Envelope {
    pub fn new(seq: u64, stamp: f64, payload: Payload) -> Self {
        Self {
            topic: payload.topic(),
            seq,
            stamp,
            payload,
        }
    }

    /// Compact JSON object `{"topic","seq","stamp","payload"}` without a
    /// trailing newline.
    pub fn to_json(&self) -> Result<String, CoreError> {
        let wire = WireEnvelope {
            topic: self.topic.as_str().to_string(),
            seq: self.seq,
            stamp: self.stamp,
            payload: self
                .payload
                .to_value()
                .map_err(|e| CoreError::Malformed(e.to_string()))?,
        };
        serde_json::to_string(&wire).map_err(|e| CoreError::Malformed(e.to_string()))
    }

    pub fn from_json(line: &str) -> Result<Self, CoreError> {
        let wire: WireEnvelope =
            serde_json::from_str(line).map_err(|e| CoreError::Malformed(e.to_string()))?;
        let topic: Topic = wire.topic.parse()?;
        let payload = Payload::from_value(topic, wire.payload)
            .map_err(|e| CoreError::Malformed(format!("{topic}: {e}")))?;
        Ok(Self {
            topic,
            seq: wire.seq,
            stamp: wire.stamp,
            payload,
        })
    }
}
