mod common;

use common::{random_message, random_sequence, single_request};
use fitbot::emotion::{classify, Dims, FrameSequence, ModelParams};
use fitbot::protocol::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn run(topology: &Topology, workload: &Workload, params: &ModelParams, seed: u64) -> SimOutcome {
    let recognize = |s: &FrameSequence| classify(params, s);
    let classifiers = Classifiers { local: &recognize, cloud: &recognize };
    run_simulation(topology, workload, classifiers, &SimConfig { seed, ..Default::default() }).unwrap()
}

fn fixture(seed: u64) -> (ModelParams, FrameSequence) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (ModelParams::init(Dims::new(4, 6), seed), random_sequence(&mut rng, 6, 4))
}

fn conserved(log: &[EventRecord]) -> bool {
    log.iter().all(|r| r.sent == r.delivered + r.dropped + r.in_flight)
}

#[test]
fn codec_round_trip_many() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..1000 {
        let msg = random_message(&mut rng);
        let bytes = encode(&msg).unwrap();
        assert_eq!(decode(&bytes).unwrap(), msg);
    }
}

#[test]
fn ack_layout() {
    let msg = EmotionMessage {
        version: PROTOCOL_VERSION,
        seq: 7,
        timestamp_ms: 1234,
        source: NodeId::edge(0),
        dest: NodeId::device(0),
        route: RouteMode::ViaEdge,
        payload: Payload::Ack { acked_seq: 6 },
    };
    let bytes = encode(&msg).unwrap();
    assert_eq!(bytes.len(), HEADER_LEN + 4 + CRC_LEN);
    assert_eq!(&bytes[..2], &MAGIC);
    let crc = crc32fast::hash(&bytes[..bytes.len() - CRC_LEN]);
    assert_eq!(&bytes[bytes.len() - CRC_LEN..], &crc.to_le_bytes());
}

#[test]
fn every_single_bit_flip_is_caught() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let bytes = encode(&random_message(&mut rng)).unwrap();
        for bit in 0..bytes.len() * 8 {
            let mut bad = bytes.clone();
            bad[bit / 8] ^= 1 << (bit % 8);
            assert!(decode(&bad).is_err(), "flip of bit {bit} accepted");
        }
    }
}

#[test]
fn truncation_and_garbage_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let bytes = encode(&random_message(&mut rng)).unwrap();
    for n in 0..bytes.len() {
        assert!(decode(&bytes[..n]).is_err());
    }
    let mut longer = bytes.clone();
    longer.push(0);
    assert!(decode(&longer).is_err());
}

#[test]
fn invalid_result_refused_by_encoder() {
    let mut score = WireScore { probabilities: vec![0.0; 21], argmax: 0 };
    score.probabilities[3] = 0.5;
    let msg = EmotionMessage {
        version: PROTOCOL_VERSION,
        seq: 0,
        timestamp_ms: 0,
        source: NodeId::cloud(0),
        dest: NodeId::device(0),
        route: RouteMode::DirectCloud,
        payload: Payload::Result(score),
    };
    assert!(encode(&msg).is_err());
}

#[test]
fn zero_jitter_round_trip_is_thirty_ms() {
    let (params, seq) = fixture(1);
    let out = run(&Topology::chain(5.0, 10.0), &single_request(seq.clone(), Quality::Standard), &params, 0);
    let rec = &out.report.requests[0];
    assert_eq!(rec.route, RouteMode::ViaEdge);
    assert_eq!(rec.outcome, Outcome::Delivered);
    assert_eq!(rec.latency_ms, Some(30.0));
    // Cloud results cross the wire in single precision.
    let wire = WireScore::from(&classify(&params, &seq).unwrap());
    assert_eq!(rec.result.as_ref().unwrap(), &wire.to_score().unwrap());
    assert!(conserved(&out.log));
}

#[test]
fn direct_cloud_for_high_quality() {
    let (params, seq) = fixture(2);
    let mut topo = Topology::chain(5.0, 10.0);
    topo.links.push(LinkModel::new(NodeId::device(0), NodeId::cloud(0), 12.0));
    let out = run(&topo, &single_request(seq.clone(), Quality::High), &params, 0);
    let rec = &out.report.requests[0];
    assert_eq!(rec.route, RouteMode::DirectCloud);
    assert_eq!(rec.latency_ms, Some(24.0));
    let standard = run(&topo, &single_request(seq, Quality::Standard), &params, 0);
    assert_eq!(standard.report.requests[0].route, RouteMode::ViaEdge);
}

#[test]
fn cloud_down_falls_back_offline() {
    let (params, _) = fixture(3);
    let mut topo = Topology::chain(5.0, 10.0);
    topo.links[1].up = false;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let requests = (0..25)
        .map(|i| WorkItem {
            send_time_ms: 7.0 * i as f64,
            device: NodeId::device(0),
            quality: if i % 3 == 0 { Quality::High } else { Quality::Standard },
            sequence: random_sequence(&mut rng, 1 + i % 5, 4),
        })
        .collect();
    let workload = Workload { requests };
    let out = run(&topo, &workload, &params, 9);
    assert_eq!(out.report.delivered, 25);
    for (rec, item) in out.report.requests.iter().zip(&workload.requests) {
        assert_eq!(rec.route, RouteMode::Offline);
        assert_eq!(rec.latency_ms, Some(0.0));
        let local = classify(&params, &item.sequence).unwrap();
        let got = rec.result.as_ref().unwrap();
        assert!(got.probabilities.iter().zip(&local.probabilities).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
    assert_eq!(out.report.hops.sent, 0);
    assert!(conserved(&out.log));
}

#[test]
fn zero_latency_links_deliver_instantly() {
    let (params, seq) = fixture(4);
    let out = run(&Topology::chain(0.0, 0.0), &single_request(seq, Quality::Standard), &params, 0);
    assert_eq!(out.report.requests[0].latency_ms, Some(0.0));
}

#[test]
fn link_failure_mid_flight() {
    let (params, seq) = fixture(5);
    let mut topo = Topology::chain(5.0, 10.0);
    // The request reaches the edge at 5 ms and finds the cloud link down.
    topo.link_changes.push(LinkChange {
        time_ms: 2.0,
        endpoints: (NodeId::edge(0), NodeId::cloud(0)),
        up: false,
    });
    let out = run(&topo, &single_request(seq, Quality::Standard), &params, 0);
    assert_eq!(out.report.dropped, 1);
    assert_eq!(out.report.budget_violations, 1);
    assert!(conserved(&out.log));
}

#[test]
fn lossy_jittery_network_conserves_and_is_deterministic() {
    let (params, _) = fixture(6);
    let mut topo = Topology::chain(5.0, 10.0);
    for link in &mut topo.links {
        link.jitter_ms = 8.0;
        link.drop_probability = 0.2;
    }
    topo.link_changes.push(LinkChange { time_ms: 300.0, endpoints: (NodeId::edge(0), NodeId::cloud(0)), up: false });
    topo.link_changes.push(LinkChange { time_ms: 600.0, endpoints: (NodeId::edge(0), NodeId::cloud(0)), up: true });
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let requests = (0..100)
        .map(|_| WorkItem {
            send_time_ms: rng.gen_range(0.0..1000.0),
            device: NodeId::device(0),
            quality: Quality::Standard,
            sequence: random_sequence(&mut rng, 3, 4),
        })
        .collect();
    let workload = Workload { requests };
    let a = run(&topo, &workload, &params, 42);
    let b = run(&topo, &workload, &params, 42);
    assert_eq!(a, b);
    let r = &a.report;
    assert!(conserved(&a.log));
    assert_eq!(r.sent, 100);
    assert_eq!(r.in_flight, 0);
    assert_eq!(r.sent, r.delivered + r.dropped);
    assert!(r.dropped > 0 && r.delivered > 0);
    let offline = r.per_mode.get(&RouteMode::Offline).map_or(0, |m| m.requests);
    assert!(offline > 0);
    for rec in r.requests.iter().filter(|x| x.route == RouteMode::ViaEdge && x.outcome == Outcome::Delivered) {
        let l = rec.latency_ms.unwrap();
        assert!((30.0..=30.0 + 4.0 * 8.0).contains(&l), "latency {l}");
    }
    let c = run(&topo, &workload, &params, 43);
    assert_ne!(a.report, c.report);
}

#[test]
fn bad_topologies_rejected() {
    let (params, seq) = fixture(7);
    let work = single_request(seq, Quality::Standard);
    let recognize = |s: &FrameSequence| classify(&params, s);
    let cls = Classifiers { local: &recognize, cloud: &recognize };
    let mut neg = Topology::chain(5.0, 10.0);
    neg.links[0].base_latency_ms = -1.0;
    let mut unknown = Topology::chain(5.0, 10.0);
    unknown.links.push(LinkModel::new(NodeId::device(0), NodeId::cloud(3), 1.0));
    let mut prob = Topology::chain(5.0, 10.0);
    prob.links[1].drop_probability = 1.5;
    for topo in [neg, unknown, prob] {
        let err = run_simulation(&topo, &work, cls, &SimConfig::default()).unwrap_err();
        assert!(matches!(err, fitbot::Error::Configuration(_)));
    }
}

fn arb_message() -> impl Strategy<Value = EmotionMessage> {
    any::<u64>().prop_map(|s| random_message(&mut ChaCha8Rng::seed_from_u64(s)))
}

proptest! {
    #[test]
    fn codec_round_trip(msg in arb_message()) {
        let bytes = encode(&msg).unwrap();
        prop_assert_eq!(decode(&bytes).unwrap(), msg);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = decode(&bytes);
    }
}
