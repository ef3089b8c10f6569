//! UI gateway: state frames out, operator inputs in.
//!
//! Sessions never block the simulation. Each session has a bounded queue;
//! frames for a session whose queue is full are dropped, and sessions whose
//! receiver is gone are pruned on the next broadcast.

use std::sync::mpsc::{self, Receiver, Sender, SyncSender, TrySendError};
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};
use teleop_core::{Mode, OccupancyMsg, Pose2D};
use teleop_netlink::ConnectivityStatus;

use crate::metrics::RunMetrics;
use crate::twin::TwinSource;

/// Frames per second pushed to sessions.
pub const FRAME_RATE_HZ: f64 = 20.0;
/// Queued frames per session before new ones are dropped.
pub const SESSION_QUEUE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    Snapshot,
    Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwinView {
    pub pose: Pose2D,
    pub source: TwinSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Notice {
    GoalRejected { x: f64, y: f64, reason: String },
}

/// One state frame. `map` is present in snapshots and in frames where the
/// map changed since the previous frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    #[serde(rename = "type")]
    pub kind: FrameKind,
    pub seq: u64,
    pub t: f64,
    pub twin: TwinView,
    /// Wall segments as `[ax, ay, bx, by]`.
    pub walls: Vec<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub map: Option<OccupancyMsg>,
    pub map_version: u64,
    pub plan: Vec<Pose2D>,
    pub goal: Option<Pose2D>,
    pub mode: Mode,
    pub connectivity: ConnectivityStatus,
    pub link_down: bool,
    pub paused: bool,
    pub metrics: RunMetrics,
    pub notices: Vec<Notice>,
}

impl Frame {
    pub fn to_json(&self) -> String {
        // every field is plain data with string keys
        serde_json::to_string(self).expect("frame serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    OutageStart,
    OutageEnd,
    Pause,
    Resume,
}

/// Message from a UI session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorInput {
    Teleop {
        v: f64,
        w: f64,
    },
    Goal {
        x: f64,
        y: f64,
        #[serde(default)]
        theta: Option<f64>,
    },
    Control {
        command: Control,
    },
}

impl OperatorInput {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

/// Reply sent to a single session whose input could not be parsed.
pub fn error_message(message: &str) -> String {
    serde_json::json!({"type": "error", "message": message}).to_string()
}

struct SessionTx {
    id: u64,
    tx: SyncSender<Arc<str>>,
}

struct HubState {
    sessions: Vec<SessionTx>,
    next_id: u64,
    last_frame: Option<Frame>,
    last_map: Option<OccupancyMsg>,
    dropped: u64,
}

/// Fan-out of frames to UI sessions and fan-in of their inputs.
pub struct GatewayHub {
    state: Mutex<HubState>,
    capacity: usize,
    inputs_tx: Sender<(u64, OperatorInput)>,
    inputs_rx: Mutex<Receiver<(u64, OperatorInput)>>,
}

/// Receiving end of one UI session.
pub struct Session {
    pub id: u64,
    frames: Receiver<Arc<str>>,
    inputs: Sender<(u64, OperatorInput)>,
}

impl Session {
    pub fn try_next(&self) -> Option<Arc<str>> {
        self.frames.try_recv().ok()
    }

    pub fn recv_timeout(&self, t: std::time::Duration) -> Option<Arc<str>> {
        self.frames.recv_timeout(t).ok()
    }

    pub fn submit(&self, input: OperatorInput) {
        // the hub owns the receiver for as long as any session exists
        let _ = self.inputs.send((self.id, input));
    }
}

impl Default for GatewayHub {
    fn default() -> Self {
        Self::new(SESSION_QUEUE)
    }
}

impl GatewayHub {
    pub fn new(capacity: usize) -> Self {
        let (inputs_tx, inputs_rx) = mpsc::channel();
        Self {
            state: Mutex::new(HubState {
                sessions: Vec::new(),
                next_id: 1,
                last_frame: None,
                last_map: None,
                dropped: 0,
            }),
            capacity: capacity.max(1),
            inputs_tx,
            inputs_rx: Mutex::new(inputs_rx),
        }
    }

    fn lock(&self) -> MutexGuard<'_, HubState> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Registers a session. Its first message is a snapshot of the latest
    /// state, if any frame has been broadcast yet.
    pub fn connect(&self) -> Session {
        let (tx, rx) = mpsc::sync_channel(self.capacity);
        let mut st = self.lock();
        let id = st.next_id;
        st.next_id += 1;
        if let Some(f) = &st.last_frame {
            let mut snap = f.clone();
            snap.kind = FrameKind::Snapshot;
            snap.map = st.last_map.clone();
            // the queue is empty, so this cannot fail
            let _ = tx.try_send(Arc::from(snap.to_json()));
        }
        st.sessions.push(SessionTx { id, tx });
        Session {
            id,
            frames: rx,
            inputs: self.inputs_tx.clone(),
        }
    }

    pub fn session_count(&self) -> usize {
        self.lock().sessions.len()
    }

    /// Frames dropped because a session queue was full.
    pub fn dropped(&self) -> u64 {
        self.lock().dropped
    }

    /// Sends `frame` to every session; never blocks.
    pub fn broadcast(&self, frame: &Frame) {
        let text: Arc<str> = Arc::from(frame.to_json());
        let mut st = self.lock();
        if let Some(m) = &frame.map {
            st.last_map = Some(m.clone());
        }
        let mut stored = frame.clone();
        stored.map = None;
        stored.notices.clear();
        st.last_frame = Some(stored);
        let mut dropped = 0;
        st.sessions.retain(|s| match s.tx.try_send(text.clone()) {
            Ok(()) => true,
            Err(TrySendError::Full(_)) => {
                dropped += 1;
                true
            }
            Err(TrySendError::Disconnected(_)) => {
                log::debug!("pruning UI session {}", s.id);
                false
            }
        });
        st.dropped += dropped;
    }

    /// Inputs received from all sessions since the last call, in arrival
    /// order.
    pub fn drain_inputs(&self) -> Vec<(u64, OperatorInput)> {
        let rx = self.inputs_rx.lock().unwrap_or_else(|e| e.into_inner());
        rx.try_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use teleop_core::{GridGeometry, Point2};
    use teleop_netlink::Connectivity;

    fn frame(seq: u64, map: bool) -> Frame {
        let header = GridGeometry::covering(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), 0.5);
        Frame {
            kind: FrameKind::Frame,
            seq,
            t: seq as f64 * 0.05,
            twin: TwinView {
                pose: Pose2D::new(1.0, 2.0, 0.0),
                source: TwinSource::Telemetry,
            },
            walls: vec![[0.0, 0.0, 1.0, 0.0]],
            map: map.then(|| OccupancyMsg {
                cells: vec![-1; header.len()],
                header,
            }),
            map_version: 1,
            plan: Vec::new(),
            goal: None,
            mode: Mode::Remote,
            connectivity: ConnectivityStatus {
                status: Connectivity::Good,
                last_change: 0.0,
            },
            link_down: false,
            paused: false,
            metrics: RunMetrics::default(),
            notices: Vec::new(),
        }
    }

    #[test]
    fn input_schemas() {
        assert_eq!(
            OperatorInput::parse(r#"{"type":"teleop","v":0.3,"w":-0.1}"#).unwrap(),
            OperatorInput::Teleop { v: 0.3, w: -0.1 }
        );
        assert_eq!(
            OperatorInput::parse(r#"{"type":"goal","x":9,"y":1.5}"#).unwrap(),
            OperatorInput::Goal { x: 9.0, y: 1.5, theta: None }
        );
        assert_eq!(
            OperatorInput::parse(r#"{"type":"control","command":"outage_start"}"#).unwrap(),
            OperatorInput::Control { command: Control::OutageStart }
        );
        assert!(OperatorInput::parse(r#"{"type":"teleop","v":0.3}"#).is_err());
        assert!(OperatorInput::parse(r#"{"type":"warp","x":1}"#).is_err());
        assert!(OperatorInput::parse(r#"{"type":"goal","x":1,"y":1,"z":0}"#).is_err());
    }

    #[test]
    fn frame_omits_unchanged_map() {
        let j: serde_json::Value = serde_json::from_str(&frame(1, false).to_json()).unwrap();
        assert_eq!(j["type"], "frame");
        assert!(j.get("map").is_none());
        assert_eq!(j["twin"]["source"], "telemetry");
        let j: serde_json::Value = serde_json::from_str(&frame(1, true).to_json()).unwrap();
        assert_eq!(j["map"]["cells"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn late_joiner_gets_snapshot_with_map_first() {
        let hub = GatewayHub::new(8);
        hub.broadcast(&frame(1, true));
        hub.broadcast(&frame(2, false));
        let s = hub.connect();
        let first: Frame = serde_json::from_str(&s.try_next().unwrap()).unwrap();
        assert_eq!(first.kind, FrameKind::Snapshot);
        assert_eq!(first.seq, 2);
        assert!(first.map.is_some());
        assert!(s.try_next().is_none());
        hub.broadcast(&frame(3, false));
        let next: Frame = serde_json::from_str(&s.try_next().unwrap()).unwrap();
        assert_eq!((next.kind, next.seq), (FrameKind::Frame, 3));
    }

    #[test]
    fn sessions_receive_identical_sequences() {
        let hub = GatewayHub::new(16);
        let a = hub.connect();
        let b = hub.connect();
        for i in 0..10 {
            hub.broadcast(&frame(i, i % 4 == 0));
        }
        let ra: Vec<_> = std::iter::from_fn(|| a.try_next()).collect();
        let rb: Vec<_> = std::iter::from_fn(|| b.try_next()).collect();
        assert_eq!(ra.len(), 10);
        assert_eq!(ra, rb);
    }

    #[test]
    fn slow_session_drops_and_closed_session_pruned() {
        let hub = GatewayHub::new(2);
        let slow = hub.connect();
        let gone = hub.connect();
        drop(gone);
        for i in 0..5 {
            hub.broadcast(&frame(i, false));
        }
        assert_eq!(hub.session_count(), 1);
        assert_eq!(hub.dropped(), 3);
        let got: Vec<_> = std::iter::from_fn(|| slow.try_next()).collect();
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn inputs_are_tagged_by_session() {
        let hub = GatewayHub::default();
        let a = hub.connect();
        let b = hub.connect();
        b.submit(OperatorInput::Teleop { v: 0.1, w: 0.0 });
        a.submit(OperatorInput::Control { command: Control::Pause });
        let got = hub.drain_inputs();
        assert_eq!(got[0].0, b.id);
        assert_eq!(got[1], (a.id, OperatorInput::Control { command: Control::Pause }));
        assert!(hub.drain_inputs().is_empty());
    }
}
