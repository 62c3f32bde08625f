//! JSON message schemas shared by the registry, the HTTP/WebSocket server
//! and its clients. Every message is `{"type": ..., "payload": ...}`.

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use super::ServiceError;
use crate::dialogue::Phase;
use crate::evaluation::MetricsReport;
use crate::multimodal::SystemAction;
use crate::spots::{SightseeingSpot, SpotId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    /// Sent once a transport is attached; the server answers with the latest
    /// system turn and the current phase, so reconnects resume cleanly.
    Start,
    UserText { text: String },
    /// One captured frame, base64-encoded.
    Capture { image: String },
    Questionnaire {
        items: [u8; 9],
        #[serde(default)]
        post_intent: Option<u8>,
    },
    PreIntent { spot_id: SpotId, value: u8 },
}

impl ClientMessage {
    pub fn from_json(text: &str) -> Result<Self, ServiceError> {
        serde_json::from_str(text).map_err(|e| ServiceError::Protocol(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("client messages serialize")
    }

    pub fn capture(bytes: &[u8]) -> Self {
        ClientMessage::Capture {
            image: STANDARD.encode(bytes),
        }
    }
}

pub(crate) fn decode_image(image: &str) -> Result<Vec<u8>, ServiceError> {
    let bytes = STANDARD
        .decode(image)
        .map_err(|e| ServiceError::Protocol(format!("capture is not base64: {e}")))?;
    if bytes.is_empty() {
        return Err(ServiceError::Protocol("capture is empty".into()));
    }
    Ok(bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionPayload {
    pub text: String,
    /// `kind:name:intensity[:duration]` tokens joined by `;`.
    pub directives: String,
    pub phase: Phase,
    pub generic: bool,
}

impl From<&SystemAction> for ActionPayload {
    fn from(a: &SystemAction) -> Self {
        Self {
            text: a.utterance.clone(),
            directives: a.directive_string(),
            phase: a.phase,
            generic: a.generic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    NotFound,
    Gone,
    Protocol,
    Invalid,
    Conflict,
}

/// Per-session outcome. Fields fill in as the user supplies intents and
/// the questionnaire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMetrics {
    pub session_id: String,
    pub phase: Phase,
    pub recommended: Option<SpotId>,
    pub pre_intent: Option<u8>,
    pub post_intent: Option<u8>,
    pub effect: Option<i8>,
    pub impression_total: Option<u32>,
    pub report: Option<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum ServerMessage {
    SystemAction(ActionPayload),
    Phase { phase: Phase, turn: u32 },
    Error { code: ErrorCode, message: String },
    Metrics(SessionMetrics),
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ServiceError> {
        serde_json::from_str(text).map_err(|e| ServiceError::Protocol(e.to_string()))
    }

    pub fn action(a: &SystemAction) -> Self {
        ServerMessage::SystemAction(a.into())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionMode {
    /// Captures arrive from the client and go to the configured estimator.
    #[default]
    Live,
    /// A simulated estimator stands in; captures are not needed.
    Persona,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    pub preselected: (SpotId, SpotId),
    #[serde(default)]
    pub mode: SessionMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSessionResponse {
    pub session_id: String,
    pub messages: Vec<ServerMessage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpotSummary {
    pub id: SpotId,
    pub name: String,
    pub group: String,
    pub photo_ref: String,
}

impl From<&SightseeingSpot> for SpotSummary {
    fn from(s: &SightseeingSpot) -> Self {
        Self {
            id: s.id.clone(),
            name: s.name.clone(),
            group: s.category_group.code().to_string(),
            photo_ref: s.photo_ref.clone(),
        }
    }
}
