use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("map is not equivariant at {0}")]
    NotEquivariant(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("not detected in range: {0}")]
    NotDetected(String),
    #[error("ring data error: {0}")]
    RingData(String),
    #[error("spectral sequence rule error: {0}")]
    Rule(String),
    #[error("verification error: {0}")]
    Verify(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
