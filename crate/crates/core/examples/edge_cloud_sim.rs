//! Simulate a device talking to the cloud through an edge server, with a
//! cloud outage that forces offline recognition.

use fitbot::emotion::{classify, toy, Dims, FrameSequence, ModelParams};
use fitbot::protocol::{run_simulation, Classifiers, LinkChange, NodeId, Quality, RouteMode, SimConfig, Topology, WorkItem, Workload};

fn main() -> fitbot::Result<()> {
    let params = ModelParams::init(Dims::new(toy::TOY_BANDS, 16), 1);
    let recognize = |s: &FrameSequence| classify(&params, s);

    let mut topology = Topology::chain(5.0, 10.0);
    for link in &mut topology.links {
        link.jitter_ms = 3.0;
        link.drop_probability = 0.02;
    }
    let edge_cloud = (NodeId::edge(0), NodeId::cloud(0));
    topology.link_changes = vec![
        LinkChange { time_ms: 400.0, endpoints: edge_cloud, up: false },
        LinkChange { time_ms: 700.0, endpoints: edge_cloud, up: true },
    ];

    let requests = toy::separable_toy_set(40, 1)?
        .into_iter()
        .enumerate()
        .map(|(i, (sequence, _))| WorkItem {
            send_time_ms: 25.0 * i as f64,
            device: NodeId::device(0),
            quality: Quality::Standard,
            sequence,
        })
        .collect();
    let outcome = run_simulation(
        &topology,
        &Workload { requests },
        Classifiers { local: &recognize, cloud: &recognize },
        &SimConfig { seed: 1, ..Default::default() },
    )?;

    let r = &outcome.report;
    println!("sent {}  delivered {}  dropped {}  over budget {}", r.sent, r.delivered, r.dropped, r.budget_violations);
    for mode in RouteMode::ALL {
        if let Some(stats) = r.per_mode.get(&mode) {
            println!("  {:<12} {:3} requests, {:3} delivered", mode.as_str(), stats.requests, stats.delivered);
        }
    }
    for rec in r.requests.iter().step_by(8) {
        let latency = rec.latency_ms.map_or("-".to_string(), |l| format!("{l:.2} ms"));
        println!("  t={:5.0}  {:<12} {latency}", rec.send_time_ms, rec.route.as_str());
    }
    println!("{} log events", outcome.log.len());
    Ok(())
}
