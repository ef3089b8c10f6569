//! The link between robot and operator: latency, jitter, random loss and
//! scheduled outages on an envelope stream, plus the ping monitor that turns
//! the link's behaviour into a Good/Bad connectivity status.
//!
//! Everything runs against caller-supplied timestamps, so the same code serves
//! the virtual clock of headless runs and wall-clock time over TCP.

pub mod classify;
pub mod config;
pub mod error;
pub mod link;
pub mod ping;
pub mod wire;

pub use classify::{classify_connectivity, Connectivity, ConnectivityClassifier, ConnectivityStatus};
pub use config::{LinkConfig, Outage};
pub use error::LinkError;
pub use link::{Direction, DropReason, Link, LinkStats, SendOutcome};
pub use ping::{PingMonitor, PingRecord};
pub use wire::{EnvelopeReader, FaultyWriter};
