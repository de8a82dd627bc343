use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::emotion::{argmax, EmotionLabel, EmotionScore, FrameSequence, CLASS_COUNT};
use crate::{Error, Result};

pub const PROTOCOL_VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
#[repr(u8)]
pub enum NodeKind {
    Device = 1,
    Edge = 2,
    Cloud = 3,
}

impl NodeKind {
    pub fn from_wire(byte: u8) -> Option<Self> {
        match byte {
            1 => Some(Self::Device),
            2 => Some(Self::Edge),
            3 => Some(Self::Cloud),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub kind: NodeKind,
    pub index: u8,
}

impl NodeId {
    pub const fn device(index: u8) -> Self {
        Self { kind: NodeKind::Device, index }
    }

    pub const fn edge(index: u8) -> Self {
        Self { kind: NodeKind::Edge, index }
    }

    pub const fn cloud(index: u8) -> Self {
        Self { kind: NodeKind::Cloud, index }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            NodeKind::Device => "DEVICE",
            NodeKind::Edge => "EDGE",
            NodeKind::Cloud => "CLOUD",
        };
        write!(f, "{kind}{}", self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
#[repr(u8)]
pub enum RouteMode {
    ViaEdge = 1,
    DirectCloud = 2,
    Offline = 3,
}

impl RouteMode {
    pub const ALL: [RouteMode; 3] = [RouteMode::ViaEdge, RouteMode::DirectCloud, RouteMode::Offline];

    pub fn from_wire(byte: u8) -> Option<Self> {
        match byte {
            1 => Some(Self::ViaEdge),
            2 => Some(Self::DirectCloud),
            3 => Some(Self::Offline),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ViaEdge => "VIA_EDGE",
            Self::DirectCloud => "DIRECT_CLOUD",
            Self::Offline => "OFFLINE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
#[repr(u8)]
pub enum MsgType {
    EmotionRequest = 1,
    EmotionResult = 2,
    Ack = 3,
}

impl MsgType {
    pub fn from_wire(byte: u8) -> Option<Self> {
        match byte {
            1 => Some(Self::EmotionRequest),
            2 => Some(Self::EmotionResult),
            3 => Some(Self::Ack),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::EmotionRequest => "EMOTION_REQUEST",
            Self::EmotionResult => "EMOTION_RESULT",
            Self::Ack => "ACK",
        }
    }
}

/// Names a feature sequence held by the sender and pins its content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestPayload {
    pub utterance_id: String,
    pub frame_count: u32,
    pub frame_dim: u16,
    /// SHA-256 of the frames, see [`frame_digest`].
    pub digest: [u8; 32],
}

impl RequestPayload {
    pub fn for_sequence(seq: &FrameSequence) -> Result<Self> {
        let frame_count = u32::try_from(seq.len())
            .map_err(|_| Error::invalid("too many frames for a request"))?;
        let frame_dim = u16::try_from(seq.dim().unwrap_or(0))
            .map_err(|_| Error::invalid("frame dimension too large for a request"))?;
        Ok(Self {
            utterance_id: seq.utterance_id.clone(),
            frame_count,
            frame_dim,
            digest: frame_digest(seq),
        })
    }

    pub fn matches(&self, seq: &FrameSequence) -> bool {
        self.utterance_id == seq.utterance_id
            && self.frame_count as usize == seq.len()
            && self.frame_dim as usize == seq.dim().unwrap_or(0)
            && self.digest == frame_digest(seq)
    }
}

/// SHA-256 over every frame value as little-endian `f64`, frame by frame.
pub fn frame_digest(seq: &FrameSequence) -> [u8; 32] {
    let mut hasher = Sha256::new();
    for frame in &seq.frames {
        for v in frame {
            hasher.update(v.to_le_bytes());
        }
    }
    hasher.finalize().into()
}

/// Class probabilities as carried on the wire, in single precision.
#[derive(Debug, Clone, PartialEq)]
pub struct WireScore {
    pub probabilities: Vec<f32>,
    pub argmax: u8,
}

/// Tolerance on the probability sum after narrowing to `f32`.
pub const WIRE_SUM_TOLERANCE: f32 = 1e-5;

impl WireScore {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.probabilities.len() != CLASS_COUNT {
            return Err(format!(
                "result carries {} classes, expected {CLASS_COUNT}",
                self.probabilities.len()
            ));
        }
        if self.probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err("result probability outside [0, 1]".into());
        }
        let sum: f32 = self.probabilities.iter().sum();
        if (sum - 1.0).abs() > WIRE_SUM_TOLERANCE {
            return Err(format!("result probabilities sum to {sum}"));
        }
        let Some(&top) = self.probabilities.get(self.argmax as usize) else {
            return Err(format!("argmax {} out of range", self.argmax));
        };
        if self.probabilities.iter().any(|&p| p > top) {
            return Err(format!("argmax {} is not a maximal class", self.argmax));
        }
        Ok(())
    }

    /// Widens back to double precision, renormalizing the narrowed values.
    pub fn to_score(&self) -> Result<EmotionScore> {
        let sum: f64 = self.probabilities.iter().map(|&p| p as f64).sum();
        let probabilities: Vec<f64> =
            self.probabilities.iter().map(|&p| p as f64 / sum).collect();
        let argmax = EmotionLabel::new(argmax(&probabilities))?;
        Ok(EmotionScore { probabilities, argmax })
    }
}

impl From<&EmotionScore> for WireScore {
    fn from(score: &EmotionScore) -> Self {
        Self {
            probabilities: score.probabilities.iter().map(|&p| p as f32).collect(),
            argmax: score.argmax.index() as u8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Request(RequestPayload),
    Result(WireScore),
    Ack { acked_seq: u32 },
}

impl Payload {
    pub fn msg_type(&self) -> MsgType {
        match self {
            Payload::Request(_) => MsgType::EmotionRequest,
            Payload::Result(_) => MsgType::EmotionResult,
            Payload::Ack { .. } => MsgType::Ack,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmotionMessage {
    pub version: u8,
    pub seq: u32,
    pub timestamp_ms: u64,
    pub source: NodeId,
    pub dest: NodeId,
    pub route: RouteMode,
    pub payload: Payload,
}

impl EmotionMessage {
    pub fn msg_type(&self) -> MsgType {
        self.payload.msg_type()
    }
}
