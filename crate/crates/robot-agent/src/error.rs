use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("goal ({x:.3}, {y:.3}) lies outside the map")]
    GoalOutsideMap { x: f64, y: f64 },
    #[error("goal frame must be `map`, got `{0}`")]
    GoalFrame(String),
    #[error("invalid agent config: {0}")]
    Config(String),
}
