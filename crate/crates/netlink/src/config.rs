use serde::{Deserialize, Serialize};

use crate::error::LinkError;

/// Half-open interval `[start, end)` in simulation seconds during which the
/// link carries nothing. Serialized as a `[start, end]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Outage {
    pub start: f64,
    pub end: f64,
}

impl Outage {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

impl From<(f64, f64)> for Outage {
    fn from((start, end): (f64, f64)) -> Self {
        Self { start, end }
    }
}

impl From<Outage> for (f64, f64) {
    fn from(o: Outage) -> Self {
        (o.start, o.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub base_latency: f64,
    pub jitter_std: f64,
    pub loss_prob: f64,
    pub outages: Vec<Outage>,
    pub seed: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            base_latency: 0.02,
            jitter_std: 0.005,
            loss_prob: 0.0,
            outages: Vec::new(),
            seed: 0,
        }
    }
}

impl LinkConfig {
    /// No latency variation, no loss, no outages.
    pub fn ideal(base_latency: f64) -> Self {
        Self {
            base_latency,
            jitter_std: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        let bad = |m: String| Err(LinkError::Config(m));
        if !(self.base_latency >= 0.0 && self.base_latency.is_finite()) {
            return bad(format!("base_latency must be finite and >= 0, got {}", self.base_latency));
        }
        if !(self.jitter_std >= 0.0 && self.jitter_std.is_finite()) {
            return bad(format!("jitter_std must be finite and >= 0, got {}", self.jitter_std));
        }
        if !(0.0..=1.0).contains(&self.loss_prob) {
            return bad(format!("loss_prob must lie in [0, 1], got {}", self.loss_prob));
        }
        for o in &self.outages {
            if !(o.start.is_finite() && o.start < o.end) {
                return bad(format!("outage [{}, {}) is empty or not finite at its start", o.start, o.end));
            }
        }
        for w in self.outages.windows(2) {
            if w[1].start < w[0].end {
                return bad(format!(
                    "outages must be sorted and disjoint: [{}, {}) then [{}, {})",
                    w[0].start, w[0].end, w[1].start, w[1].end
                ));
            }
        }
        Ok(())
    }

    pub fn in_outage(&self, t: f64) -> bool {
        self.outages.iter().any(|o| o.contains(t))
    }
}
