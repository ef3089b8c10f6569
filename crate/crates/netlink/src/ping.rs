use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use teleop_core::{PingMsg, PongMsg};

use crate::error::LinkError;

/// Slack for comparing tick-derived timestamps against the ping schedule.
const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PingRecord {
    pub seq: u64,
    pub sent_at: f64,
    /// 0 when the pong came back within the timeout, 1 otherwise.
    pub code: u8,
}

/// Sends a ping every `interval` and scores each one once its pong arrives
/// or its timeout passes.
///
/// Call order within a tick: [`on_pong`](Self::on_pong) for every delivered
/// pong, then [`expire`](Self::expire), then [`due`](Self::due).
#[derive(Debug, Clone)]
pub struct PingMonitor {
    interval: f64,
    timeout: f64,
    start: f64,
    sent: u64,
    outstanding: BTreeMap<u64, f64>,
}

impl PingMonitor {
    pub const DEFAULT_INTERVAL: f64 = 0.1;
    pub const DEFAULT_TIMEOUT: f64 = 0.08;

    pub fn new(interval: f64, timeout: f64, start: f64) -> Result<Self, LinkError> {
        if !(interval > 0.0 && timeout > 0.0 && timeout < interval) {
            return Err(LinkError::Config(format!(
                "ping timeout {timeout} must be positive and below the interval {interval}"
            )));
        }
        Ok(Self {
            interval,
            timeout,
            start,
            sent: 0,
            outstanding: BTreeMap::new(),
        })
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    pub fn timeout(&self) -> f64 {
        self.timeout
    }

    /// The ping to send at `now`, if one is due. Sequence numbers start at 1.
    pub fn due(&mut self, now: f64) -> Option<PingMsg> {
        let next_at = self.start + self.sent as f64 * self.interval;
        if now + EPS < next_at {
            return None;
        }
        self.sent += 1;
        self.outstanding.insert(self.sent, now);
        Some(PingMsg { seq: self.sent })
    }

    /// Scores an arriving pong. Pongs for unknown or already expired pings
    /// are ignored.
    pub fn on_pong(&mut self, pong: &PongMsg, arrived_at: f64) -> Option<PingRecord> {
        let sent_at = self.outstanding.remove(&pong.seq)?;
        let in_time = arrived_at - sent_at <= self.timeout + EPS;
        Some(PingRecord {
            seq: pong.seq,
            sent_at,
            code: if in_time && pong.code == 0 { 0 } else { 1 },
        })
    }

    /// Times out every ping whose timeout has run out by `now`, oldest first.
    /// A pong arriving exactly at the deadline still counts when
    /// [`on_pong`](Self::on_pong) runs first in the tick.
    pub fn expire(&mut self, now: f64) -> Vec<PingRecord> {
        let timeout = self.timeout;
        let late: Vec<u64> = self
            .outstanding
            .iter()
            .filter(|(_, sent_at)| now - **sent_at >= timeout - EPS)
            .map(|(seq, _)| *seq)
            .collect();
        late.into_iter()
            .map(|seq| PingRecord {
                seq,
                sent_at: self.outstanding.remove(&seq).expect("collected above"),
                code: 1,
            })
            .collect()
    }

    pub fn outstanding(&self) -> usize {
        self.outstanding.len()
    }
}
