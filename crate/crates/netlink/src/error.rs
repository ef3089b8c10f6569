use teleop_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("invalid link config: {0}")]
    Config(String),
    #[error("link i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Codec(#[from] CoreError),
}
