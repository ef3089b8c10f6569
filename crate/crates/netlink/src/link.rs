use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use teleop_core::Envelope;

use crate::config::{LinkConfig, Outage};
use crate::error::LinkError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Robot to operator: telemetry and pings.
    Uplink,
    /// Operator to robot: commands, goals and pongs.
    Downlink,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Uplink, Direction::Downlink];

    fn slot(self) -> usize {
        match self {
            Direction::Uplink => 0,
            Direction::Downlink => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// Sent while the link was down.
    Outage,
    /// Would have arrived while the link was down.
    InFlight,
    /// Lost to the random loss draw.
    Loss,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SendOutcome {
    Scheduled { deliver_at: f64 },
    Dropped(DropReason),
}

impl SendOutcome {
    pub fn delivered(&self) -> bool {
        matches!(self, SendOutcome::Scheduled { .. })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LinkStats {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
}

#[derive(Debug)]
struct Channel {
    rng: ChaCha8Rng,
    queue: VecDeque<(f64, Envelope)>,
    last_delivery: f64,
    stats: LinkStats,
}

/// Both directions of the robot/operator link.
///
/// Each direction has its own random stream, so traffic in one direction
/// never perturbs drop or latency draws in the other.
#[derive(Debug)]
pub struct Link {
    config: LinkConfig,
    manual: Vec<Outage>,
    channels: [Channel; 2],
}

impl Link {
    pub fn new(config: LinkConfig) -> Result<Self, LinkError> {
        config.validate()?;
        let channel = |stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(stream);
            Channel {
                rng,
                queue: VecDeque::new(),
                last_delivery: f64::NEG_INFINITY,
                stats: LinkStats::default(),
            }
        };
        Ok(Self {
            channels: [channel(1), channel(2)],
            manual: Vec::new(),
            config,
        })
    }

    pub fn config(&self) -> &LinkConfig {
        &self.config
    }

    /// Takes the link down from `now` until [`Link::end_outage`].
    pub fn begin_outage(&mut self, now: f64) {
        if !self.manual.last().is_some_and(|o| o.end.is_infinite()) {
            self.manual.push(Outage::new(now, f64::INFINITY));
        }
    }

    pub fn end_outage(&mut self, now: f64) {
        if let Some(o) = self.manual.last_mut().filter(|o| o.end.is_infinite()) {
            o.end = now.max(o.start);
        }
    }

    pub fn is_down(&self, t: f64) -> bool {
        self.config.in_outage(t) || self.manual.iter().any(|o| o.contains(t))
    }

    /// Scheduled plus manual outages, in the order they were added.
    pub fn outages(&self) -> impl Iterator<Item = &Outage> {
        self.config.outages.iter().chain(&self.manual)
    }

    /// Puts `env` on the wire at time `now`.
    ///
    /// Every call consumes exactly one loss draw and one jitter draw, whatever
    /// the outcome, so a drop never shifts the randomness of later sends.
    pub fn send(&mut self, dir: Direction, env: Envelope, now: f64) -> SendOutcome {
        let loss_prob = self.config.loss_prob;
        let base = self.config.base_latency;
        let jitter_std = self.config.jitter_std;
        let (lost, jitter) = {
            let ch = &mut self.channels[dir.slot()];
            let u: f64 = ch.rng.random();
            let n: f64 = ch.rng.sample(StandardNormal);
            (u < loss_prob, n * jitter_std)
        };
        let deliver_at = now + (base + jitter).max(0.0);
        let outcome = if self.is_down(now) {
            SendOutcome::Dropped(DropReason::Outage)
        } else if self.is_down(deliver_at) {
            SendOutcome::Dropped(DropReason::InFlight)
        } else if lost {
            SendOutcome::Dropped(DropReason::Loss)
        } else {
            let ch = &self.channels[dir.slot()];
            SendOutcome::Scheduled {
                deliver_at: deliver_at.max(ch.last_delivery),
            }
        };
        let ch = &mut self.channels[dir.slot()];
        ch.stats.sent += 1;
        match outcome {
            SendOutcome::Scheduled { deliver_at } => {
                ch.last_delivery = deliver_at;
                ch.queue.push_back((deliver_at, env));
            }
            SendOutcome::Dropped(_) => ch.stats.dropped += 1,
        }
        outcome
    }

    /// Removes and returns every envelope due by `now`, in send order, with
    /// its delivery time.
    pub fn deliver(&mut self, dir: Direction, now: f64) -> Vec<(f64, Envelope)> {
        let ch = &mut self.channels[dir.slot()];
        let mut out = Vec::new();
        while ch.queue.front().is_some_and(|(t, _)| *t <= now) {
            out.push(ch.queue.pop_front().expect("front checked"));
        }
        ch.stats.delivered += out.len() as u64;
        out
    }

    pub fn in_flight(&self, dir: Direction) -> usize {
        self.channels[dir.slot()].queue.len()
    }

    pub fn stats(&self, dir: Direction) -> LinkStats {
        self.channels[dir.slot()].stats
    }
}
