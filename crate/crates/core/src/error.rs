//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A scenario violates a structural precondition (cluster size, pilots).
    #[error("invalid scenario: {0}")]
    Scenario(String),

    /// A checkpoint file is malformed or does not match the expected shapes.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
