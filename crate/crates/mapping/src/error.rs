use thiserror::Error;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("cannot access map file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed map file: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported map schema {found} (expected {expected})")]
    Schema { found: u32, expected: u32 },
    #[error("map file is inconsistent: {0}")]
    Mismatch(String),
    #[error("invalid thresholds: need 0 < free ({free}) < occupied ({occupied}) < 1")]
    Thresholds { free: f64, occupied: f64 },
}
