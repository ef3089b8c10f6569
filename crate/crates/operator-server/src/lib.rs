//! Operator-side endpoint: virtual twin, wall segments, UI gateway and the
//! scenario runner.

pub mod error;
pub mod gateway;
pub mod metrics;
pub mod runner;
pub mod scenario;
pub mod server;
pub mod trace;
pub mod twin;
pub mod walls;
pub mod ws;

pub use error::ServerError;
pub use gateway::{Control, Frame, FrameKind, GatewayHub, Notice, OperatorInput, Session, TwinView};
pub use metrics::{EnvelopeCounts, RunMetrics};
pub use runner::{run_live, run_scenario, RunOutput, Runner};
pub use scenario::{Scenario, ScenarioConfig, ScriptAction, SCENARIO_SCHEMA};
pub use server::{LinkWatch, OperatorServer};
pub use trace::{summarize, summarize_file, Origin, ServerEvent, Trace, TraceEvent, TraceRecord, TraceSummary};
pub use twin::{predict_along, Ingest, TwinParams, TwinSource, TwinState};
pub use walls::{WallSegment, WallSegmentSet};
pub use ws::WsServer;
