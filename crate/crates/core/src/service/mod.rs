//! Session lifecycle and the client/server message protocol.
//!
//! The [`SessionRegistry`] owns live sessions and is transport-agnostic: the
//! HTTP/WebSocket server feeds it [`ClientMessage`]s and forwards the
//! [`ServerMessage`]s it returns. Each session sits behind its own lock, so
//! per-session processing is serialized while sessions proceed independently.

mod clock;
mod protocol;
mod registry;

use std::path::PathBuf;

use thiserror::Error;

use crate::personality::{NoiseModel, DEFAULT_THRESHOLD};

pub use clock::{Clock, ManualClock, SystemClock};
pub use protocol::{
    ActionPayload, ClientMessage, CreateSessionRequest, CreateSessionResponse, ErrorCode,
    ServerMessage, SessionMetrics, SessionMode, SpotSummary,
};
pub use registry::{SessionRegistry, TransportBinding};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ServiceError {
    #[error("session {0} not found")]
    NotFound(String),
    #[error("session {0} is gone")]
    Gone(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("session {0} already has a live transport")]
    AlreadyBound(String),
}

impl ServiceError {
    pub fn code(&self) -> ErrorCode {
        match self {
            ServiceError::NotFound(_) => ErrorCode::NotFound,
            ServiceError::Gone(_) => ErrorCode::Gone,
            ServiceError::Protocol(_) => ErrorCode::Protocol,
            ServiceError::Invalid(_) => ErrorCode::Invalid,
            ServiceError::AlreadyBound(_) => ErrorCode::Conflict,
        }
    }

    pub fn to_message(&self) -> ServerMessage {
        ServerMessage::Error {
            code: self.code(),
            message: self.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    /// Sessions idle this long are closed and released.
    pub idle_timeout_ms: u64,
    pub threshold: f64,
    /// Seeds the simulated estimators of persona-mode sessions.
    pub seed: u64,
    pub noise: NoiseModel,
    /// Per-capture delay of the simulated estimator in persona mode.
    pub persona_capture_latency_ms: u64,
    /// Closed-session transcripts are appended here when set.
    pub transcript_log: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            idle_timeout_ms: 120_000,
            threshold: DEFAULT_THRESHOLD,
            seed: 0,
            noise: NoiseModel::reference(0),
            persona_capture_latency_ms: 0,
            transcript_log: None,
        }
    }
}
