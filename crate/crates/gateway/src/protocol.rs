//! Socket wire format: one JSON object per text frame. Every frame carries
//! `protocol_version` and a `type` tag; client messages carry a `ref` that the
//! server echoes in the matching `Ack` or `Error`.

use serde::{Deserialize, Serialize};

use gyrohaptic::dynamics::WheelParams;
use gyrohaptic::math::Vec3;
use gyrohaptic::session::{DeviceId, SessionConfig, Snapshot};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ClientMessage {
    SetParams {
        #[serde(rename = "ref")]
        reference: u64,
        #[serde(flatten)]
        params: WheelParams,
    },
    Pointer {
        #[serde(rename = "ref")]
        reference: u64,
        device: DeviceId,
        position: Vec3,
        /// Client's idea of the current tick; informational only.
        #[serde(default)]
        tick_hint: Option<u64>,
    },
    Start {
        #[serde(rename = "ref")]
        reference: u64,
    },
    Pause {
        #[serde(rename = "ref")]
        reference: u64,
    },
    Reset {
        #[serde(rename = "ref")]
        reference: u64,
    },
    LoadPreset {
        #[serde(rename = "ref")]
        reference: u64,
        name: String,
    },
}

impl ClientMessage {
    pub fn reference(&self) -> u64 {
        match self {
            ClientMessage::SetParams { reference, .. }
            | ClientMessage::Pointer { reference, .. }
            | ClientMessage::Start { reference }
            | ClientMessage::Pause { reference }
            | ClientMessage::Reset { reference }
            | ClientMessage::LoadPreset { reference, .. } => *reference,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ServerMessage {
    Snapshot(Snapshot),
    Ack {
        #[serde(rename = "ref")]
        reference: u64,
        effective_tick: u64,
    },
    Error {
        /// `None` when the offending frame had no readable `ref`.
        #[serde(rename = "ref")]
        reference: Option<u64>,
        code: String,
        message: String,
    },
    Hello {
        config: Box<SessionConfig>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<M> {
    pub protocol_version: u32,
    #[serde(flatten)]
    pub message: M,
}

pub mod codes {
    pub const MALFORMED: &str = "malformed";
    pub const UNSUPPORTED_VERSION: &str = "unsupported_version";
    pub const INVALID_PARAMS: &str = "invalid_params";
    pub const INVALID_POINTER: &str = "invalid_pointer";
    pub const NOT_INTERACTIVE: &str = "not_interactive";
    pub const UNKNOWN_PRESET: &str = "unknown_preset";
    pub const BLOWUP: &str = "blowup";
}

pub fn encode<M: Serialize>(message: &M) -> String {
    serde_json::to_string(&Envelope { protocol_version: PROTOCOL_VERSION, message }).expect("messages serialize")
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeError {
    pub reference: Option<u64>,
    pub code: &'static str,
    pub message: String,
}

impl DecodeError {
    pub fn into_message(self) -> ServerMessage {
        ServerMessage::Error { reference: self.reference, code: self.code.to_string(), message: self.message }
    }
}

/// Parses one client frame. On failure the `ref` is salvaged when the frame is
/// at least a JSON object with an integer `ref`.
pub fn decode_client(text: &str) -> Result<ClientMessage, DecodeError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| DecodeError {
        reference: None,
        code: codes::MALFORMED,
        message: format!("not JSON: {e}"),
    })?;
    let reference = value.get("ref").and_then(serde_json::Value::as_u64);
    match value.get("protocol_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(PROTOCOL_VERSION) => {}
        Some(v) => {
            return Err(DecodeError {
                reference,
                code: codes::UNSUPPORTED_VERSION,
                message: format!("protocol_version {v} is not supported (server speaks {PROTOCOL_VERSION})"),
            })
        }
        None => {
            return Err(DecodeError {
                reference,
                code: codes::MALFORMED,
                message: "missing protocol_version".into(),
            })
        }
    }
    // deserialize from the text, not the Value, so floats keep full precision
    serde_json::from_str::<Envelope<ClientMessage>>(text)
        .map(|e| e.message)
        .map_err(|e| DecodeError { reference, code: codes::MALFORMED, message: e.to_string() })
}

pub fn decode_server(text: &str) -> Result<ServerMessage, serde_json::Error> {
    serde_json::from_str::<Envelope<ServerMessage>>(text).map(|e| e.message)
}
