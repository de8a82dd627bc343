//! Deterministic discrete-event simulation of devices, edges and clouds.
//!
//! Each request is routed when it is issued. Offline requests are answered
//! on the device with zero latency; the others travel hop by hop as encoded
//! [`EmotionMessage`] frames. Every hop adds its link's base latency plus
//! a seeded uniform jitter and may be dropped. Devices acknowledge the
//! result to the node that delivered it.
//!
//! Events run in `(time, source, seq)` order; link state changes at a given
//! instant apply before any message event at that instant.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::codec::{decode, encode};
use super::message::*;
use super::route::{choose_route, Quality};
use crate::emotion::{EmotionScore, FrameSequence};
use crate::{Error, Result};

pub const DEFAULT_LATENCY_BUDGET_MS: f64 = 100.0;

/// Upper bounds of the per-mode latency histogram buckets; one more bucket
/// collects everything above the last bound.
pub const HISTOGRAM_BOUNDS_MS: [f64; 8] = [0.0, 10.0, 25.0, 50.0, 100.0, 250.0, 500.0, 1000.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub endpoints: (NodeId, NodeId),
    pub base_latency_ms: f64,
    #[serde(default)]
    pub jitter_ms: f64,
    #[serde(default)]
    pub drop_probability: f64,
    #[serde(default = "up")]
    pub up: bool,
}

fn up() -> bool {
    true
}

impl LinkModel {
    pub fn new(a: NodeId, b: NodeId, base_latency_ms: f64) -> Self {
        Self { endpoints: (a, b), base_latency_ms, jitter_ms: 0.0, drop_probability: 0.0, up: true }
    }

    fn connects(&self, a: NodeId, b: NodeId) -> bool {
        self.endpoints == (a, b) || self.endpoints == (b, a)
    }
}

/// Scheduled change of a link's up/down state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkChange {
    pub time_ms: f64,
    pub endpoints: (NodeId, NodeId),
    pub up: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkModel>,
    #[serde(default)]
    pub link_changes: Vec<LinkChange>,
}

impl Topology {
    /// One device, one edge and one cloud; device-edge and edge-cloud links.
    pub fn chain(device_edge_ms: f64, edge_cloud_ms: f64) -> Self {
        let (d, e, c) = (NodeId::device(0), NodeId::edge(0), NodeId::cloud(0));
        Self {
            nodes: vec![d, e, c],
            links: vec![LinkModel::new(d, e, device_edge_ms), LinkModel::new(e, c, edge_cloud_ms)],
            link_changes: Vec::new(),
        }
    }

    fn link_index(&self, a: NodeId, b: NodeId) -> Option<usize> {
        self.links.iter().position(|l| l.connects(a, b))
    }

    fn first_neighbour(&self, node: NodeId, kind: NodeKind) -> Option<NodeId> {
        self.links
            .iter()
            .filter_map(|l| match l.endpoints {
                (a, b) if a == node => Some(b),
                (a, b) if b == node => Some(a),
                _ => None,
            })
            .filter(|n| n.kind == kind)
            .min()
    }

    pub fn validate(&self) -> Result<()> {
        let known: HashSet<NodeId> = self.nodes.iter().copied().collect();
        if known.len() != self.nodes.len() {
            return Err(Error::Configuration("duplicate node id".into()));
        }
        if !self.nodes.iter().any(|n| n.kind == NodeKind::Device) {
            return Err(Error::Configuration("topology has no device".into()));
        }
        for (i, link) in self.links.iter().enumerate() {
            let (a, b) = link.endpoints;
            for n in [a, b] {
                if !known.contains(&n) {
                    return Err(Error::Configuration(format!("link {i} names unknown node {n}")));
                }
            }
            if a == b {
                return Err(Error::Configuration(format!("link {i} is a self loop")));
            }
            if self.link_index(a, b) != Some(i) {
                return Err(Error::Configuration(format!("duplicate link {a}-{b}")));
            }
            if !(link.base_latency_ms.is_finite() && link.base_latency_ms >= 0.0) {
                return Err(Error::Configuration(format!("link {a}-{b}: negative latency")));
            }
            if !(link.jitter_ms.is_finite() && link.jitter_ms >= 0.0) {
                return Err(Error::Configuration(format!("link {a}-{b}: negative jitter")));
            }
            if !(0.0..=1.0).contains(&link.drop_probability) {
                return Err(Error::Configuration(format!(
                    "link {a}-{b}: drop probability outside [0, 1]"
                )));
            }
        }
        for change in &self.link_changes {
            let (a, b) = change.endpoints;
            if self.link_index(a, b).is_none() {
                return Err(Error::Configuration(format!("link change names unknown link {a}-{b}")));
            }
            if !(change.time_ms.is_finite() && change.time_ms >= 0.0) {
                return Err(Error::Configuration("link change time must be non-negative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkItem {
    pub send_time_ms: f64,
    pub device: NodeId,
    #[serde(default)]
    pub quality: Quality,
    pub sequence: FrameSequence,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub requests: Vec<WorkItem>,
}

/// A pure recognition function.
pub type Recognizer<'a> = &'a dyn Fn(&FrameSequence) -> Result<EmotionScore>;

/// Recognizers used on the device (offline) and in the cloud.
#[derive(Clone, Copy)]
pub struct Classifiers<'a> {
    pub local: Recognizer<'a>,
    pub cloud: Recognizer<'a>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    InFlight,
    Delivered,
    Dropped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestRecord {
    pub request: usize,
    pub utterance_id: String,
    pub device: NodeId,
    pub quality: Quality,
    pub route: RouteMode,
    pub send_time_ms: f64,
    pub outcome: Outcome,
    pub latency_ms: Option<f64>,
    pub result: Option<EmotionScore>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopCounts {
    pub sent: usize,
    pub delivered: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBucket {
    /// Inclusive upper bound; `None` for the overflow bucket.
    pub upper_ms: Option<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeStats {
    pub requests: usize,
    pub delivered: usize,
    pub dropped: usize,
    pub latency_histogram: Vec<HistogramBucket>,
}

impl Default for ModeStats {
    fn default() -> Self {
        let latency_histogram = HISTOGRAM_BOUNDS_MS
            .iter()
            .map(|&b| Some(b))
            .chain([None])
            .map(|upper_ms| HistogramBucket { upper_ms, count: 0 })
            .collect();
        Self { requests: 0, delivered: 0, dropped: 0, latency_histogram }
    }
}

impl ModeStats {
    fn record_latency(&mut self, latency: f64) {
        let bucket = HISTOGRAM_BOUNDS_MS
            .iter()
            .position(|&b| latency <= b)
            .unwrap_or(HISTOGRAM_BOUNDS_MS.len());
        self.latency_histogram[bucket].count += 1;
    }
}

/// Request-level accounting of a run. `sent = delivered + dropped + in_flight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub sent: usize,
    pub delivered: usize,
    pub dropped: usize,
    pub in_flight: usize,
    pub latency_budget_ms: f64,
    /// Delivered requests slower than the budget plus every dropped request.
    pub budget_violations: usize,
    pub hops: HopCounts,
    pub per_mode: BTreeMap<RouteMode, ModeStats>,
    pub requests: Vec<RequestRecord>,
}

/// One row of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time_ms: f64,
    pub event: String,
    pub node: String,
    pub peer: Option<String>,
    pub msg_type: Option<String>,
    pub seq: Option<u32>,
    pub route: Option<String>,
    pub request: Option<usize>,
    pub sent: usize,
    pub delivered: usize,
    pub dropped: usize,
    pub in_flight: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub report: SimReport,
    pub log: Vec<EventRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub latency_budget_ms: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { latency_budget_ms: DEFAULT_LATENCY_BUDGET_MS, seed: 0 }
    }
}

enum EventKind {
    LinkChange(usize),
    Issue(usize),
    Arrive { from: NodeId, to: NodeId, bytes: Vec<u8>, request: usize },
}

struct Event {
    time: f64,
    class: u8,
    source: NodeId,
    seq: u32,
    order: u64,
    kind: EventKind,
}

impl Event {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.class.cmp(&other.class))
            .then(self.source.cmp(&other.source))
            .then(self.seq.cmp(&other.seq))
            .then(self.order.cmp(&other.order))
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_key(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_key(other)
    }
}

struct Sim<'a> {
    topology: &'a Topology,
    workload: &'a Workload,
    classifiers: Classifiers<'a>,
    links_up: Vec<bool>,
    rng: ChaCha8Rng,
    queue: BinaryHeap<Reverse<Event>>,
    order: u64,
    next_seq: HashMap<NodeId, u32>,
    /// Indexed by workload position; `None` until issued.
    records: Vec<Option<RequestRecord>>,
    /// Edge and cloud serving each request, fixed when it is issued.
    peers: Vec<(Option<NodeId>, Option<NodeId>)>,
    sent: usize,
    delivered: usize,
    dropped: usize,
    hops: HopCounts,
    log: Vec<EventRecord>,
}

/// Runs `workload` over `topology` until no events remain.
///
/// The configuration is checked up front; a request from a node that is
/// not a device in the topology is a configuration error.
pub fn run_simulation(
    topology: &Topology,
    workload: &Workload,
    classifiers: Classifiers<'_>,
    config: &SimConfig,
) -> Result<SimOutcome> {
    topology.validate()?;
    if !(config.latency_budget_ms.is_finite() && config.latency_budget_ms > 0.0) {
        return Err(Error::Configuration("latency budget must be positive".into()));
    }
    for (i, item) in workload.requests.iter().enumerate() {
        if item.device.kind != NodeKind::Device || !topology.nodes.contains(&item.device) {
            return Err(Error::Configuration(format!(
                "request {i} comes from unknown device {}",
                item.device
            )));
        }
        if !(item.send_time_ms.is_finite() && item.send_time_ms >= 0.0) {
            return Err(Error::Configuration(format!("request {i} has a negative send time")));
        }
        item.sequence.validate()?;
        if item.sequence.is_empty() {
            return Err(Error::Configuration(format!("request {i} has no frames")));
        }
    }

    let mut sim = Sim {
        topology,
        workload,
        classifiers,
        links_up: topology.links.iter().map(|l| l.up).collect(),
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        queue: BinaryHeap::new(),
        order: 0,
        next_seq: HashMap::new(),
        records: vec![None; workload.requests.len()],
        peers: vec![(None, None); workload.requests.len()],
        sent: 0,
        delivered: 0,
        dropped: 0,
        hops: HopCounts::default(),
        log: Vec::new(),
    };
    for (i, change) in topology.link_changes.iter().enumerate() {
        let source = change.endpoints.0.min(change.endpoints.1);
        sim.push(change.time_ms, 0, source, i as u32, EventKind::LinkChange(i));
    }
    for (i, item) in workload.requests.iter().enumerate() {
        sim.push(item.send_time_ms, 1, item.device, i as u32, EventKind::Issue(i));
    }
    while let Some(Reverse(event)) = sim.queue.pop() {
        sim.handle(event)?;
        sim.check_conservation()?;
    }
    Ok(sim.finish(config.latency_budget_ms))
}

impl<'a> Sim<'a> {
    fn push(&mut self, time: f64, class: u8, source: NodeId, seq: u32, kind: EventKind) {
        self.order += 1;
        self.queue.push(Reverse(Event { time, class, source, seq, order: self.order, kind }));
    }

    fn take_seq(&mut self, node: NodeId) -> u32 {
        let counter = self.next_seq.entry(node).or_insert(0);
        let seq = *counter;
        *counter += 1;
        seq
    }

    fn record(&mut self, request: usize) -> &mut RequestRecord {
        self.records[request].as_mut().expect("request was issued")
    }

    fn link_up(&self, a: Option<NodeId>, b: Option<NodeId>) -> bool {
        match (a, b) {
            (Some(a), Some(b)) => self.topology.link_index(a, b).is_some_and(|i| self.links_up[i]),
            _ => false,
        }
    }

    fn in_flight(&self) -> usize {
        self.records.iter().flatten().filter(|r| r.outcome == Outcome::InFlight).count()
    }

    fn check_conservation(&self) -> Result<()> {
        let in_flight = self.in_flight();
        if self.sent != self.delivered + self.dropped + in_flight {
            return Err(Error::InvalidState(format!(
                "message conservation violated: sent {} != delivered {} + dropped {} + in flight {in_flight}",
                self.sent, self.delivered, self.dropped
            )));
        }
        Ok(())
    }

    fn note(
        &mut self,
        time_ms: f64,
        event: &str,
        node: NodeId,
        peer: Option<NodeId>,
        msg: Option<&EmotionMessage>,
        request: Option<usize>,
    ) {
        let in_flight = self.in_flight();
        self.log.push(EventRecord {
            time_ms,
            event: event.to_string(),
            node: node.to_string(),
            peer: peer.map(|p| p.to_string()),
            msg_type: msg.map(|m| m.msg_type().as_str().to_string()),
            seq: msg.map(|m| m.seq),
            route: msg.map(|m| m.route.as_str().to_string()),
            request,
            sent: self.sent,
            delivered: self.delivered,
            dropped: self.dropped,
            in_flight,
        });
    }

    fn handle(&mut self, event: Event) -> Result<()> {
        let now = event.time;
        match event.kind {
            EventKind::LinkChange(i) => {
                let change = &self.topology.link_changes[i];
                let link = self.topology.link_index(change.endpoints.0, change.endpoints.1).unwrap();
                self.links_up[link] = change.up;
                let (a, b) = change.endpoints;
                self.note(now, if change.up { "link_up" } else { "link_down" }, a, Some(b), None, None);
                Ok(())
            }
            EventKind::Issue(i) => self.issue(now, i),
            EventKind::Arrive { from, to, bytes, request } => {
                self.hops.delivered += 1;
                let msg = decode(&bytes)?;
                self.note(now, "rx", to, Some(from), Some(&msg), Some(request));
                self.arrive(now, from, to, msg, request)
            }
        }
    }

    fn issue(&mut self, now: f64, i: usize) -> Result<()> {
        let item = &self.workload.requests[i];
        let device = item.device;
        let edge = self.topology.first_neighbour(device, NodeKind::Edge);
        let edge_cloud = edge.and_then(|e| self.topology.first_neighbour(e, NodeKind::Cloud));
        let direct_cloud = self.topology.first_neighbour(device, NodeKind::Cloud);

        let device_edge_up = self.link_up(Some(device), edge);
        let via_cloud_up = self.link_up(edge, edge_cloud);
        let direct_up = self.link_up(Some(device), direct_cloud);
        let route = if item.quality == Quality::High && direct_up {
            choose_route(true, device_edge_up, Quality::High)
        } else {
            choose_route(via_cloud_up, device_edge_up, Quality::Standard)
        };
        let cloud = match route {
            RouteMode::DirectCloud => direct_cloud,
            RouteMode::ViaEdge => edge_cloud,
            RouteMode::Offline => None,
        };

        self.sent += 1;
        self.records[i] = Some(RequestRecord {
            request: i,
            utterance_id: item.sequence.utterance_id.clone(),
            device,
            quality: item.quality,
            route,
            send_time_ms: item.send_time_ms,
            outcome: Outcome::InFlight,
            latency_ms: None,
            result: None,
        });
        self.peers[i] = (edge, cloud);

        if route == RouteMode::Offline {
            let score = (self.classifiers.local)(&item.sequence)?;
            let record = self.record(i);
            record.outcome = Outcome::Delivered;
            record.latency_ms = Some(0.0);
            record.result = Some(score);
            self.delivered += 1;
            self.note(now, "offline", device, None, None, Some(i));
            return Ok(());
        }

        let cloud = cloud.expect("online route has a cloud");
        let msg = EmotionMessage {
            version: PROTOCOL_VERSION,
            seq: self.take_seq(device),
            timestamp_ms: now as u64,
            source: device,
            dest: cloud,
            route,
            payload: Payload::Request(RequestPayload::for_sequence(&item.sequence)?),
        };
        self.note(now, "issue", device, Some(cloud), Some(&msg), Some(i));
        let next = if route == RouteMode::ViaEdge { edge.unwrap() } else { cloud };
        self.transmit(now, device, next, &msg, i)
    }

    fn transmit(
        &mut self,
        now: f64,
        from: NodeId,
        to: NodeId,
        msg: &EmotionMessage,
        request: usize,
    ) -> Result<()> {
        let index = self.topology.link_index(from, to).ok_or_else(|| {
            Error::InvalidState(format!("no link between {from} and {to}"))
        })?;
        let link = &self.topology.links[index];
        let jitter = self.rng.gen::<f64>() * link.jitter_ms;
        let lost = self.rng.gen::<f64>() < link.drop_probability;
        let arrival = now + link.base_latency_ms + jitter;
        self.hops.sent += 1;

        if lost || !self.links_up[index] {
            self.hops.dropped += 1;
            if msg.msg_type() != MsgType::Ack {
                self.record(request).outcome = Outcome::Dropped;
                self.dropped += 1;
            }
            self.note(now, "drop", from, Some(to), Some(msg), Some(request));
            return Ok(());
        }
        let bytes = encode(msg)?;
        self.note(now, "tx", from, Some(to), Some(msg), Some(request));
        self.push(arrival, 1, msg.source, msg.seq, EventKind::Arrive { from, to, bytes, request });
        Ok(())
    }

    fn arrive(
        &mut self,
        now: f64,
        from: NodeId,
        at: NodeId,
        msg: EmotionMessage,
        request: usize,
    ) -> Result<()> {
        let (edge, _) = self.peers[request];
        match (&msg.payload, at.kind) {
            (Payload::Ack { .. }, _) => Ok(()),
            (_, NodeKind::Edge) => self.transmit(now, at, msg.dest, &msg, request),
            (Payload::Request(req), NodeKind::Cloud) => {
                let item = &self.workload.requests[request];
                if !req.matches(&item.sequence) {
                    return Err(Error::InvalidState(format!(
                        "request {request} digest does not match its frames"
                    )));
                }
                let score = (self.classifiers.cloud)(&item.sequence)?;
                let reply = EmotionMessage {
                    version: PROTOCOL_VERSION,
                    seq: self.take_seq(at),
                    timestamp_ms: now as u64,
                    source: at,
                    dest: msg.source,
                    route: msg.route,
                    payload: Payload::Result(WireScore::from(&score)),
                };
                let next = match msg.route {
                    RouteMode::ViaEdge => edge.expect("via-edge request has an edge"),
                    _ => msg.source,
                };
                self.transmit(now, at, next, &reply, request)
            }
            (Payload::Result(score), NodeKind::Device) => {
                let score = score.to_score()?;
                let record = self.record(request);
                let latency = now - record.send_time_ms;
                record.outcome = Outcome::Delivered;
                record.latency_ms = Some(latency);
                record.result = Some(score);
                self.delivered += 1;
                self.note(now, "complete", at, Some(from), Some(&msg), Some(request));
                let ack = EmotionMessage {
                    version: PROTOCOL_VERSION,
                    seq: self.take_seq(at),
                    timestamp_ms: now as u64,
                    source: at,
                    dest: from,
                    route: msg.route,
                    payload: Payload::Ack { acked_seq: msg.seq },
                };
                self.transmit(now, at, from, &ack, request)
            }
            (payload, _) => Err(Error::InvalidState(format!(
                "{} arrived at {at}, which does not handle it",
                payload.msg_type().as_str()
            ))),
        }
    }

    fn finish(self, budget: f64) -> SimOutcome {
        let mut per_mode: BTreeMap<RouteMode, ModeStats> =
            RouteMode::ALL.iter().map(|&m| (m, ModeStats::default())).collect();
        let mut violations = 0;
        for record in self.records.iter().flatten() {
            let stats = per_mode.get_mut(&record.route).unwrap();
            stats.requests += 1;
            match (record.outcome, record.latency_ms) {
                (Outcome::Delivered, Some(latency)) => {
                    stats.delivered += 1;
                    stats.record_latency(latency);
                    if latency > budget {
                        violations += 1;
                    }
                }
                (Outcome::Dropped, _) => {
                    stats.dropped += 1;
                    violations += 1;
                }
                _ => {}
            }
        }
        let in_flight = self.in_flight();
        SimOutcome {
            report: SimReport {
                sent: self.sent,
                delivered: self.delivered,
                dropped: self.dropped,
                in_flight,
                latency_budget_ms: budget,
                budget_violations: violations,
                hops: self.hops,
                per_mode,
                requests: self.records.into_iter().flatten().collect(),
            },
            log: self.log,
        }
    }
}
