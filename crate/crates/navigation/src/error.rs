use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NavError {
    #[error("no path to the goal")]
    NoPath,
    #[error("goal cell and its surroundings are in collision")]
    GoalInCollision,
    #[error("start cell is not traversable")]
    StartInCollision,
    #[error("point ({x:.3}, {y:.3}) is outside the costmap")]
    OutOfBounds { x: f64, y: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}
