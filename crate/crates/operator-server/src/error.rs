use teleop_netlink::LinkError;
use teleop_robot::AgentError;
use teleop_worldsim::WorldError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("world: {0}")]
    World(#[from] WorldError),
    #[error("agent: {0}")]
    Agent(#[from] AgentError),
    #[error("link: {0}")]
    Link(#[from] LinkError),
    #[error("trace line {line}: {reason}")]
    Trace { line: usize, reason: String },
    #[error("gateway: {0}")]
    Gateway(String),
}
