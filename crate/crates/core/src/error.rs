use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("non-finite value: {0}")]
    NonFinite(f64),
    #[error("unknown topic `{0}`")]
    UnknownTopic(String),
    #[error("payload does not match topic {topic}")]
    PayloadMismatch { topic: &'static str },
    #[error("malformed envelope: {0}")]
    Malformed(String),
}

/// World-to-grid conversion failures. Out-of-bounds is kept apart from
/// arithmetic problems so callers can truncate rays at the border.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("point ({x}, {y}) lies outside the grid")]
    OutOfBounds { x: f64, y: f64 },
    #[error("invalid grid arithmetic: {0}")]
    Arithmetic(String),
}
