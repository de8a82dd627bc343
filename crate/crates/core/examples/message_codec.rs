//! Build, encode and decode the three message kinds, then corrupt one.

use fitbot::emotion::{classify, toy, Dims, ModelParams};
use fitbot::protocol::{decode, encode, EmotionMessage, NodeId, Payload, RequestPayload, RouteMode, WireScore, PROTOCOL_VERSION};

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect::<Vec<_>>().join(" ")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (seq, _) = toy::separable_toy_set(1, 2)?.remove(0);
    let params = ModelParams::init(Dims::new(toy::TOY_BANDS, 8), 2);
    let score = classify(&params, &seq)?;

    let header = |seq, source, dest, payload| EmotionMessage {
        version: PROTOCOL_VERSION,
        seq,
        timestamp_ms: 1_700_000_000_000,
        source,
        dest,
        route: RouteMode::ViaEdge,
        payload,
    };
    let (device, cloud) = (NodeId::device(0), NodeId::cloud(0));
    let messages = [
        header(1, device, cloud, Payload::Request(RequestPayload::for_sequence(&seq)?)),
        header(1, cloud, device, Payload::Result(WireScore::from(&score))),
        header(2, device, cloud, Payload::Ack { acked_seq: 1 }),
    ];
    for msg in &messages {
        let bytes = encode(msg)?;
        assert_eq!(&decode(&bytes)?, msg);
        println!("{:<16} {:3} bytes", msg.msg_type().as_str(), bytes.len());
    }

    let mut ack = encode(&messages[2])?;
    println!("ACK: {}", hex(&ack));
    ack[10] ^= 0x04;
    println!("after flipping one bit: {}", decode(&ack).unwrap_err());
    Ok(())
}
