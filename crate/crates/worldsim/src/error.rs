use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("cannot read world file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed world file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported world schema {found}, expected {expected}")]
    Schema { found: u32, expected: u32 },
    #[error("invalid world: {0}")]
    Invalid(String),
}
