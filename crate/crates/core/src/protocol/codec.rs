//! Wire layout, all integers little-endian:
//!
//! ```text
//! off size field
//!   0   2  magic 0x41 0x57
//!   2   1  version
//!   3   1  msg_type      1 = REQUEST, 2 = RESULT, 3 = ACK
//!   4   4  seq
//!   8   8  timestamp_ms
//!  16   2  source kind, index
//!  18   2  dest kind, index
//!  20   1  route         1 = VIA_EDGE, 2 = DIRECT_CLOUD, 3 = OFFLINE
//!  21   1  reserved (0)
//!  22   4  payload_len
//!  26   n  payload
//! 26+n  4  crc32 (IEEE) of bytes 0..26+n
//! ```
//!
//! Payloads:
//!
//! - REQUEST: id_len u16, utterance id (UTF-8), frame_count u32,
//!   frame_dim u16, 32-byte SHA-256 frame digest
//! - RESULT: class_count u8 (21), class_count f32 probabilities, argmax u8
//! - ACK: acked seq u32

use thiserror::Error;

use super::message::*;

pub const MAGIC: [u8; 2] = [0x41, 0x57];
pub const HEADER_LEN: usize = 26;
pub const CRC_LEN: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("bad frame: {0}")]
    Format(String),
    #[error("truncated frame: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("checksum mismatch: computed {computed:#010x}, frame carries {carried:#010x}")]
    Checksum { computed: u32, carried: u32 },
    #[error("unsupported {0}")]
    Unsupported(String),
    #[error("payload of {0} bytes exceeds the wire limit")]
    TooLarge(usize),
    #[error("invalid message: {0}")]
    Invalid(String),
}

type CodecResult<T> = Result<T, CodecError>;

pub fn encode(msg: &EmotionMessage) -> CodecResult<Vec<u8>> {
    if msg.version != PROTOCOL_VERSION {
        return Err(CodecError::Unsupported(format!("version {}", msg.version)));
    }
    let payload = encode_payload(&msg.payload)?;
    let payload_len =
        u32::try_from(payload.len()).map_err(|_| CodecError::TooLarge(payload.len()))?;

    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + CRC_LEN);
    out.extend_from_slice(&MAGIC);
    out.push(msg.version);
    out.push(msg.msg_type() as u8);
    out.extend_from_slice(&msg.seq.to_le_bytes());
    out.extend_from_slice(&msg.timestamp_ms.to_le_bytes());
    out.extend_from_slice(&[msg.source.kind as u8, msg.source.index]);
    out.extend_from_slice(&[msg.dest.kind as u8, msg.dest.index]);
    out.push(msg.route as u8);
    out.push(0);
    out.extend_from_slice(&payload_len.to_le_bytes());
    out.extend_from_slice(&payload);
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

fn encode_payload(payload: &Payload) -> CodecResult<Vec<u8>> {
    let mut out = Vec::new();
    match payload {
        Payload::Request(req) => {
            let id = req.utterance_id.as_bytes();
            let id_len = u16::try_from(id.len()).map_err(|_| CodecError::TooLarge(id.len()))?;
            out.extend_from_slice(&id_len.to_le_bytes());
            out.extend_from_slice(id);
            out.extend_from_slice(&req.frame_count.to_le_bytes());
            out.extend_from_slice(&req.frame_dim.to_le_bytes());
            out.extend_from_slice(&req.digest);
        }
        Payload::Result(score) => {
            score.validate().map_err(CodecError::Invalid)?;
            out.push(score.probabilities.len() as u8);
            for p in &score.probabilities {
                out.extend_from_slice(&p.to_le_bytes());
            }
            out.push(score.argmax);
        }
        Payload::Ack { acked_seq } => out.extend_from_slice(&acked_seq.to_le_bytes()),
    }
    Ok(out)
}

/// Parses one frame. The checksum is verified before any other field, so
/// any corruption the CRC detects reports as [`CodecError::Checksum`].
pub fn decode(bytes: &[u8]) -> CodecResult<EmotionMessage> {
    let min = HEADER_LEN + CRC_LEN;
    if bytes.len() < min {
        return Err(CodecError::Truncated { expected: min, actual: bytes.len() });
    }
    let (body, crc_bytes) = bytes.split_at(bytes.len() - CRC_LEN);
    let carried = u32::from_le_bytes(crc_bytes.try_into().unwrap());
    let computed = crc32fast::hash(body);
    if computed != carried {
        return Err(CodecError::Checksum { computed, carried });
    }

    let mut r = Reader { buf: body, pos: 0 };
    if r.take(2)? != MAGIC {
        return Err(CodecError::Format("bad magic".into()));
    }
    let version = r.u8()?;
    if version != PROTOCOL_VERSION {
        return Err(CodecError::Unsupported(format!("version {version}")));
    }
    let type_byte = r.u8()?;
    let msg_type = MsgType::from_wire(type_byte)
        .ok_or_else(|| CodecError::Unsupported(format!("message type {type_byte}")))?;
    let seq = r.u32()?;
    let timestamp_ms = r.u64()?;
    let source = r.node()?;
    let dest = r.node()?;
    let route_byte = r.u8()?;
    let route = RouteMode::from_wire(route_byte)
        .ok_or_else(|| CodecError::Format(format!("unknown route {route_byte}")))?;
    if r.u8()? != 0 {
        return Err(CodecError::Format("reserved byte is not zero".into()));
    }
    let payload_len = r.u32()? as usize;
    if HEADER_LEN + payload_len + CRC_LEN != bytes.len() {
        return Err(CodecError::Truncated {
            expected: HEADER_LEN + payload_len + CRC_LEN,
            actual: bytes.len(),
        });
    }

    let payload = match msg_type {
        MsgType::EmotionRequest => {
            let id_len = r.u16()? as usize;
            let id = std::str::from_utf8(r.take(id_len)?)
                .map_err(|_| CodecError::Format("utterance id is not UTF-8".into()))?
                .to_string();
            let frame_count = r.u32()?;
            let frame_dim = r.u16()?;
            let digest = r.take(32)?.try_into().unwrap();
            Payload::Request(RequestPayload { utterance_id: id, frame_count, frame_dim, digest })
        }
        MsgType::EmotionResult => {
            let count = r.u8()? as usize;
            let probabilities = (0..count).map(|_| r.f32()).collect::<CodecResult<Vec<_>>>()?;
            let argmax = r.u8()?;
            let score = WireScore { probabilities, argmax };
            score.validate().map_err(CodecError::Format)?;
            Payload::Result(score)
        }
        MsgType::Ack => Payload::Ack { acked_seq: r.u32()? },
    };
    if r.pos != body.len() {
        return Err(CodecError::Format(format!(
            "{} trailing payload bytes",
            body.len() - r.pos
        )));
    }
    Ok(EmotionMessage { version, seq, timestamp_ms, source, dest, route, payload })
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> CodecResult<&'a [u8]> {
        let end = self.pos + n;
        if end > self.buf.len() {
            return Err(CodecError::Format("payload shorter than its fields".into()));
        }
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> CodecResult<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> CodecResult<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> CodecResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> CodecResult<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> CodecResult<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn node(&mut self) -> CodecResult<NodeId> {
        let kind_byte = self.u8()?;
        let kind = NodeKind::from_wire(kind_byte)
            .ok_or_else(|| CodecError::Format(format!("unknown node kind {kind_byte}")))?;
        Ok(NodeId { kind, index: self.u8()? })
    }
}
