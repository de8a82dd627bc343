//! Emotion messaging between wearable devices, edge servers and the cloud.

mod codec;
pub mod io;
mod message;
mod route;
mod sim;

pub use codec::{decode, encode, CodecError, CRC_LEN, HEADER_LEN, MAGIC};
pub use message::{
    frame_digest, EmotionMessage, MsgType, NodeId, NodeKind, Payload, RequestPayload, RouteMode,
    WireScore, PROTOCOL_VERSION, WIRE_SUM_TOLERANCE,
};
pub use route::{choose_route, Quality};
pub use sim::{
    run_simulation, Classifiers, EventRecord, HistogramBucket, HopCounts, LinkChange, LinkModel,
    ModeStats, Outcome, Recognizer, RequestRecord, SimConfig, SimOutcome, SimReport, Topology,
    WorkItem, Workload, DEFAULT_LATENCY_BUDGET_MS, HISTOGRAM_BOUNDS_MS,
};
