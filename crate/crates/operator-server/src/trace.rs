//! JSON-lines event trace.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::Serialize;
use serde_json::Value;
use teleop_core::{GoalMsg, Pose2D};
use teleop_netlink::{ConnectivityStatus, Direction, DropReason};
use teleop_robot::AgentEvent;

use crate::error::ServerError;
use crate::twin::TwinSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Robot,
    Link,
    Server,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ServerEvent {
    Send {
        dir: Direction,
        topic: &'static str,
        seq: u64,
        deliver_at: f64,
    },
    Drop {
        dir: Direction,
        topic: &'static str,
        seq: u64,
        reason: DropReason,
    },
    Deliver {
        dir: Direction,
        topic: &'static str,
        seq: u64,
        stamp: f64,
    },
    OutageBegin,
    OutageEnd,
    GoalSent {
        goal: GoalMsg,
    },
    GoalRefused {
        x: f64,
        y: f64,
        reason: String,
    },
    ServerConnectivity(ConnectivityStatus),
    TwinSource {
        source: TwinSource,
        pose: Pose2D,
    },
    Reconcile {
        teleport: f64,
        predicted: Pose2D,
        fresh: Pose2D,
    },
    Malformed {
        topic: &'static str,
        seq: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TraceEvent {
    Robot(AgentEvent),
    Server(ServerEvent),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: f64,
    pub origin: Origin,
    #[serde(flatten)]
    pub event: TraceEvent,
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn robot(&mut self, t: f64, e: AgentEvent) {
        self.records.push(TraceRecord {
            t,
            origin: Origin::Robot,
            event: TraceEvent::Robot(e),
        });
    }

    pub fn link(&mut self, t: f64, e: ServerEvent) {
        self.push(t, Origin::Link, e);
    }

    pub fn server(&mut self, t: f64, e: ServerEvent) {
        self.push(t, Origin::Server, e);
    }

    fn push(&mut self, t: f64, origin: Origin, e: ServerEvent) {
        self.records.push(TraceRecord {
            t,
            origin,
            event: TraceEvent::Server(e),
        });
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_jsonl<W: Write>(&self, w: &mut W) -> Result<(), ServerError> {
        for r in &self.records {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        // writing into a Vec cannot fail and every record serializes
        self.write_jsonl(&mut buf).expect("in-memory trace");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

/// Condensed view of a trace file.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TraceSummary {
    pub records: usize,
    pub last_t: f64,
    pub counts: BTreeMap<String, usize>,
    /// (time, from, to) per mode transition.
    pub transitions: Vec<(f64, String, String)>,
    pub teleports: Vec<f64>,
    pub collisions: usize,
    pub goal_reached_at: Option<f64>,
}

pub fn summarize<R: BufRead>(r: R) -> Result<TraceSummary, ServerError> {
    let mut s = TraceSummary::default();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).map_err(|e| ServerError::Trace {
            line: i + 1,
            reason: e.to_string(),
        })?;
        let t = v["t"].as_f64().ok_or_else(|| ServerError::Trace {
            line: i + 1,
            reason: "missing \"t\"".into(),
        })?;
        let event = v["event"].as_str().ok_or_else(|| ServerError::Trace {
            line: i + 1,
            reason: "missing \"event\"".into(),
        })?;
        s.records += 1;
        s.last_t = s.last_t.max(t);
        *s.counts.entry(event.to_string()).or_default() += 1;
        match event {
            "transition" => s.transitions.push((
                t,
                v["from"].as_str().unwrap_or("?").to_string(),
                v["to"].as_str().unwrap_or("?").to_string(),
            )),
            "reconcile" => s.teleports.push(v["teleport"].as_f64().unwrap_or(f64::NAN)),
            "collision" => s.collisions += 1,
            "goal_reached" if s.goal_reached_at.is_none() => s.goal_reached_at = Some(t),
            _ => {}
        }
    }
    Ok(s)
}

pub fn summarize_file(path: &std::path::Path) -> Result<TraceSummary, ServerError> {
    let f = std::fs::File::open(path).map_err(|e| ServerError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    summarize(io::BufReader::new(f))
}
