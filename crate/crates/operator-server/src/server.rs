//! Operator-side endpoint: everything the server knows comes from envelopes
//! delivered over the link.

use std::collections::HashMap;

use teleop_core::{
    Bus, Envelope, GoalMsg, Mode, ModeMsg, OccupancyMsg, Payload, PlanPath, PongMsg, Pose2D, Publisher, Topic,
    Twist,
};
use teleop_netlink::{ConnectivityClassifier, ConnectivityStatus, PingRecord};
use teleop_robot::AgentConfig;

use crate::trace::ServerEvent;
use crate::twin::{Ingest, TwinParams, TwinSource, TwinState};
use crate::walls::WallSegmentSet;

/// Server view of the link, scored from ping arrivals: every ping that
/// arrives counts as success, every interval without one as failure.
#[derive(Debug, Clone)]
pub struct LinkWatch {
    interval: f64,
    timeout: f64,
    deadline_base: f64,
    classifier: ConnectivityClassifier,
}

const EPS: f64 = 1e-9;

impl LinkWatch {
    pub fn new(interval: f64, timeout: f64, k: usize) -> Self {
        Self {
            interval,
            timeout,
            deadline_base: 0.0,
            classifier: ConnectivityClassifier::new(k, 0.0),
        }
    }

    pub fn status(&self) -> ConnectivityStatus {
        self.classifier.status()
    }

    pub fn on_ping(&mut self, seq: u64, now: f64) -> Option<ConnectivityStatus> {
        self.deadline_base = now;
        let rec = PingRecord {
            seq,
            sent_at: now,
            code: 0,
        };
        self.classifier.push(&rec, now)
    }

    pub fn tick(&mut self, now: f64) -> Vec<ConnectivityStatus> {
        let mut out = Vec::new();
        while now - self.deadline_base >= self.interval + self.timeout - EPS {
            self.deadline_base += self.interval;
            let rec = PingRecord {
                seq: 0,
                sent_at: self.deadline_base,
                code: 1,
            };
            out.extend(self.classifier.push(&rec, now));
        }
        out
    }
}

/// Result of handling one delivered envelope.
#[derive(Debug, Default)]
pub struct Handled {
    pub replies: Vec<Envelope>,
    pub events: Vec<ServerEvent>,
    pub teleport: Option<f64>,
}

pub struct OperatorServer {
    pub twin: TwinState,
    pub walls: WallSegmentSet,
    map: Option<OccupancyMsg>,
    map_version: u64,
    plan: PlanPath,
    mode: ModeMsg,
    watch: LinkWatch,
    goal: Option<GoalMsg>,
    last_seq: HashMap<Topic, u64>,
    malformed: u64,
    publisher: Publisher,
    last_source: TwinSource,
    _bus: Bus,
}

impl OperatorServer {
    pub fn new(twin: TwinParams, start: Pose2D, agent: &AgentConfig) -> Self {
        let bus = Bus::new();
        Self {
            twin: TwinState::new(twin, start),
            walls: WallSegmentSet::new(),
            map: None,
            map_version: 0,
            plan: PlanPath::default(),
            mode: ModeMsg {
                mode: Mode::Remote,
                since: 0.0,
            },
            watch: LinkWatch::new(agent.ping_interval, agent.ping_timeout, agent.debounce_k),
            goal: None,
            last_seq: HashMap::new(),
            malformed: 0,
            publisher: bus.publisher(),
            last_source: TwinSource::Telemetry,
            _bus: bus,
        }
    }

    pub fn map(&self) -> Option<&OccupancyMsg> {
        self.map.as_ref()
    }

    /// Bumped each time a /map with different content arrives.
    pub fn map_version(&self) -> u64 {
        self.map_version
    }

    pub fn plan(&self) -> &PlanPath {
        &self.plan
    }

    pub fn mode(&self) -> ModeMsg {
        self.mode
    }

    pub fn connectivity(&self) -> ConnectivityStatus {
        self.watch.status()
    }

    pub fn goal(&self) -> Option<&GoalMsg> {
        self.goal.as_ref()
    }

    pub fn malformed(&self) -> u64 {
        self.malformed + self.twin.malformed()
    }

    fn fresh(&mut self, env: &Envelope) -> bool {
        let last = self.last_seq.entry(env.topic).or_insert(0);
        if env.seq <= *last {
            return false;
        }
        *last = env.seq;
        true
    }

    /// Handles an uplink envelope delivered at `now`.
    pub fn on_delivery(&mut self, env: &Envelope, now: f64) -> Handled {
        let mut h = Handled::default();
        if env.payload.topic() != env.topic {
            self.malformed += 1;
            h.events.push(ServerEvent::Malformed {
                topic: env.topic.as_str(),
                seq: env.seq,
            });
            return h;
        }
        match &env.payload {
            Payload::Odom(_) | Payload::Plan(_) => {
                let predicted = self.twin.update(now);
                match self.twin.ingest(env, now) {
                    Ingest::Reconciled(d) => {
                        h.teleport = Some(d);
                        h.events.push(ServerEvent::Reconcile {
                            teleport: d,
                            predicted,
                            fresh: self.twin.odom_pose().unwrap_or(predicted),
                        });
                    }
                    Ingest::Applied => {
                        if let Payload::Plan(p) = &env.payload {
                            self.plan = p.clone();
                        }
                    }
                    Ingest::Stale | Ingest::Ignored => {}
                }
                self.note_source(&mut h.events);
            }
            Payload::Ping(p) => {
                let pong = self.publisher.send(now, Payload::Pong(PongMsg { seq: p.seq, code: 0 }));
                h.replies.push(pong);
                if let Some(s) = self.watch.on_ping(p.seq, now) {
                    h.events.push(ServerEvent::ServerConnectivity(s));
                }
            }
            Payload::Scan(scan) => {
                if self.fresh(env) {
                    if let Some(pose) = self.twin.odom_pose_at(scan.stamp) {
                        self.walls.ingest_scan(scan, &pose, now);
                    }
                }
            }
            Payload::Map(m) => {
                if self.fresh(env) && self.map.as_ref() != Some(m) {
                    self.map = Some(m.clone());
                    self.map_version += 1;
                }
            }
            Payload::Mode(m) => {
                if self.fresh(env) {
                    self.mode = *m;
                }
            }
            // operator-bound traffic never travels uplink
            Payload::CmdVel(_) | Payload::Goal(_) | Payload::Pong(_) => {}
        }
        h
    }

    fn note_source(&mut self, events: &mut Vec<ServerEvent>) {
        if self.twin.source != self.last_source {
            self.last_source = self.twin.source;
            events.push(ServerEvent::TwinSource {
                source: self.twin.source,
                pose: self.twin.pose,
            });
        }
    }

    /// Advances timers to `now`: twin prediction, link watch, wall expiry.
    pub fn tick(&mut self, now: f64) -> Vec<ServerEvent> {
        let mut events: Vec<ServerEvent> =
            self.watch.tick(now).into_iter().map(ServerEvent::ServerConnectivity).collect();
        self.twin.update(now);
        self.note_source(&mut events);
        self.walls.expire(now);
        events
    }

    pub fn teleop(&mut self, twist: Twist, now: f64) -> Envelope {
        self.publisher.send(now, Payload::CmdVel(twist))
    }

    /// Validates an operator goal against the latest map and addresses it
    /// to the robot.
    pub fn goal_request(&mut self, x: f64, y: f64, theta: Option<f64>, now: f64) -> Result<Envelope, String> {
        if !(x.is_finite() && y.is_finite() && theta.is_none_or(f64::is_finite)) {
            return Err("goal coordinates must be finite".into());
        }
        let Some(map) = &self.map else {
            return Err("no map received yet".into());
        };
        let (lo, hi) = map.header.extent();
        if x < lo.x || x >= hi.x || y < lo.y || y >= hi.y {
            return Err(format!("({x}, {y}) is outside the map"));
        }
        let goal = GoalMsg::new(now, Pose2D::new(x, y, theta.unwrap_or(0.0)));
        self.goal = Some(goal.clone());
        Ok(self.publisher.send(now, Payload::Goal(goal)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use teleop_core::{GridGeometry, OdomMsg, PingMsg, Point2};
    use teleop_netlink::Connectivity;

    fn server() -> OperatorServer {
        OperatorServer::new(TwinParams::default(), Pose2D::default(), &AgentConfig::default())
    }

    #[test]
    fn ping_gets_pong_with_same_seq() {
        let mut s = server();
        let h = s.on_delivery(&Envelope::new(7, 0.7, Payload::Ping(PingMsg { seq: 7 })), 0.72);
        assert_eq!(h.replies.len(), 1);
        assert_eq!(h.replies[0].payload, Payload::Pong(PongMsg { seq: 7, code: 0 }));
    }

    #[test]
    fn watch_goes_bad_without_pings_and_recovers() {
        let mut w = LinkWatch::new(0.1, 0.08, 3);
        for seq in 0..50u64 {
            let t = seq as f64 * 0.1 + 0.02;
            w.on_ping(seq + 1, t);
            assert!(w.tick(t).is_empty());
        }
        // last ping at 4.92; failures at 5.10, 5.20, 5.30
        let mut bad_at = None;
        let mut now = 4.94;
        while bad_at.is_none() {
            now += 0.02;
            if let Some(s) = w.tick(now).first() {
                bad_at = Some(s.last_change);
            }
        }
        let bad_at = bad_at.unwrap();
        assert!((bad_at - 5.30).abs() < 0.021, "{bad_at}");
        assert_eq!(w.status().status, Connectivity::Bad);
        w.on_ping(100, 9.02);
        w.on_ping(101, 9.12);
        let s = w.on_ping(102, 9.22).unwrap();
        assert_eq!(s.status, Connectivity::Good);
    }

    #[test]
    fn goals_validated_against_map() {
        let mut s = server();
        assert!(s.goal_request(1.0, 1.0, None, 0.0).is_err());
        let header = GridGeometry::covering(Point2::new(0.0, 0.0), Point2::new(10.0, 3.0), 0.05);
        let map = OccupancyMsg {
            cells: vec![-1; header.len()],
            header,
        };
        s.on_delivery(&Envelope::new(1, 0.0, Payload::Map(map)), 0.02);
        assert_eq!(s.map_version(), 1);
        let env = s.goal_request(9.0, 1.5, None, 0.5).unwrap();
        assert_eq!(env.topic, Topic::Goal);
        assert!(s.goal_request(11.0, 1.5, None, 0.5).is_err());
        assert!(s.goal_request(-0.1, 1.5, None, 0.5).is_err());
        assert!(s.goal_request(f64::NAN, 1.5, None, 0.5).is_err());
    }

    #[test]
    fn map_version_changes_only_with_content() {
        let mut s = server();
        let header = GridGeometry::covering(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), 0.5);
        let map = OccupancyMsg {
            cells: vec![-1; header.len()],
            header,
        };
        s.on_delivery(&Envelope::new(1, 0.0, Payload::Map(map.clone())), 0.0);
        s.on_delivery(&Envelope::new(2, 1.0, Payload::Map(map.clone())), 1.0);
        assert_eq!(s.map_version(), 1);
        let mut changed = map;
        changed.cells[0] = 0;
        s.on_delivery(&Envelope::new(3, 2.0, Payload::Map(changed)), 2.0);
        assert_eq!(s.map_version(), 2);
    }

    #[test]
    fn reconciliation_reported() {
        let mut s = server();
        let odom = |seq, t, x| {
            Envelope::new(
                seq,
                t,
                Payload::Odom(OdomMsg {
                    pose: Pose2D::new(x, 0.0, 0.0),
                    twist: Twist::ZERO,
                }),
            )
        };
        s.on_delivery(&odom(1, 0.0, 1.0), 0.0);
        let ev = s.tick(1.0);
        assert!(ev.iter().any(|e| matches!(e, ServerEvent::TwinSource { source: TwinSource::Predicted, .. })));
        let h = s.on_delivery(&odom(2, 1.0, 1.5), 1.0);
        assert_eq!(h.teleport, Some(0.5));
        assert!(matches!(h.events[0], ServerEvent::Reconcile { .. }));
    }
}
