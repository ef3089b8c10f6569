//! In-process topic bus.
//!
//! Publishing holds the registry lock while fanning out, so every subscriber
//! of a topic observes the same per-topic order even with several threads
//! publishing at once.

use std::collections::HashMap;
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use crate::error::CoreError;
use crate::msg::{Envelope, Payload, Topic};

#[derive(Clone, Default)]
pub struct Bus {
    subscribers: Arc<Mutex<HashMap<Topic, Vec<Sender<Envelope>>>>>,
}

impl std::fmt::Debug for Bus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bus").finish_non_exhaustive()
    }
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn subscribe(&self, topic: &str) -> Result<Subscription, CoreError> {
        let topic: Topic = topic.parse()?;
        Ok(self.subscribe_topic(topic))
    }

    pub fn subscribe_topic(&self, topic: Topic) -> Subscription {
        let (tx, rx) = mpsc::channel();
        self.lock().entry(topic).or_default().push(tx);
        Subscription { topic, rx }
    }

    /// A publisher with its own per-topic sequence counters.
    pub fn publisher(&self) -> Publisher {
        Publisher {
            bus: self.clone(),
            next_seq: HashMap::new(),
        }
    }

    /// Delivers an already-sequenced envelope, e.g. one that arrived over the
    /// link. Returns the number of subscribers reached.
    pub fn forward(&self, env: Envelope) -> usize {
        let mut subs = self.lock();
        let Some(list) = subs.get_mut(&env.topic) else {
            return 0;
        };
        list.retain(|tx| tx.send(env.clone()).is_ok());
        list.len()
    }

    pub fn subscriber_count(&self, topic: Topic) -> usize {
        self.lock().get(&topic).map_or(0, Vec::len)
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<Topic, Vec<Sender<Envelope>>>> {
        // A panic while holding the lock leaves the map itself consistent.
        self.subscribers.lock().unwrap_or_else(|e| e.into_inner())
    }
}

pub struct Publisher {
    bus: Bus,
    next_seq: HashMap<Topic, u64>,
}

impl Publisher {
    /// Publishes on a topic given by name. The payload must belong to it.
    pub fn publish(&mut self, topic: &str, stamp: f64, payload: Payload) -> Result<Envelope, CoreError> {
        let topic: Topic = topic.parse()?;
        if payload.topic() != topic {
            return Err(CoreError::PayloadMismatch {
                topic: topic.as_str(),
            });
        }
        Ok(self.send(stamp, payload))
    }

    /// Publishes on the payload's own topic; sequence numbers start at 1.
    pub fn send(&mut self, stamp: f64, payload: Payload) -> Envelope {
        let seq = self.next_seq.entry(payload.topic()).or_insert(1);
        let env = Envelope::new(*seq, stamp, payload);
        *seq += 1;
        self.bus.forward(env.clone());
        env
    }
}

pub struct Subscription {
    topic: Topic,
    rx: Receiver<Envelope>,
}

impl Subscription {
    pub fn topic(&self) -> Topic {
        self.topic
    }

    pub fn try_recv(&self) -> Option<Envelope> {
        self.rx.try_recv().ok()
    }

    pub fn recv_timeout(&self, timeout: Duration) -> Option<Envelope> {
        self.rx.recv_timeout(timeout).ok()
    }

    /// Everything queued right now, in arrival order.
    pub fn drain(&self) -> Vec<Envelope> {
        self.rx.try_iter().collect()
    }
}
