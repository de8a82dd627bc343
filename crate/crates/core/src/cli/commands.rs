use std::path::{Path, PathBuf};

use super::*;
use crate::curation::{self, CurationDataset};
use crate::eeg::{self, io as eeg_io};
use crate::emotion::{self, dataset, toy, Dims, ModelParams};
use crate::io::{read_json, write_json, write_text};
use crate::protocol::{self, io as sim_io, Classifiers, Quality, SimConfig, Topology, Workload};
use crate::{Error, Result};

pub(super) fn execute(cli: Cli) -> Result<i32> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out = cli.out.as_path();
    match cli.command {
        Group::Eeg(EegCommand::Gen(args)) => eeg_gen(args, &mut config, out),
        Group::Eeg(EegCommand::Detect(args)) => eeg_detect(args, &mut config, out),
        Group::Eeg(EegCommand::Eval(args)) => eeg_eval(args, &mut config, out),
        Group::Emotion(EmotionCommand::Train(args)) => emotion_train(args, &mut config, out),
        Group::Emotion(EmotionCommand::Classify(args)) => emotion_classify(args, &mut config, out),
        Group::Emotion(EmotionCommand::Gradcheck(args)) => gradcheck(args, &mut config, out),
        Group::Sim(SimCommand::Run(args)) => sim_run(args, &mut config, out),
        Group::Curate(CurateCommand::Run(args)) => curate_run(args, &mut config, out),
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

fn pick(flag: Option<PathBuf>, configured: &Option<PathBuf>, fallback: impl FnOnce() -> PathBuf) -> PathBuf {
    flag.or_else(|| configured.clone()).unwrap_or_else(fallback)
}

fn eeg_gen(args: EegGenArgs, config: &mut RunConfig, out: &Path) -> Result<i32> {
    let synth = &mut config.eeg.synthetic;
    set(&mut synth.blinks, args.blinks);
    set(&mut synth.duration_ms, args.duration_ms);
    set(&mut synth.sample_rate_hz, args.sample_rate);
    set(&mut synth.noise_amplitude, args.noise);
    set(&mut synth.blink_amplitude, args.blink_amplitude);
    let (trace, truth) = synth.generate(config.seed)?;
    eeg_io::write_trace_csv(&out.join("trace.csv"), &trace)?;
    write_json(&out.join("trace.json"), &trace)?;
    write_json(&out.join("truth.json"), &truth)?;
    println!("generated {} samples with {} blinks", trace.len(), truth.len());
    Ok(EXIT_OK)
}

fn eeg_detect(args: EegDetectArgs, config: &mut RunConfig, out: &Path) -> Result<i32> {
    let params = &mut config.eeg.params;
    set(&mut params.threshold, args.threshold);
    set(&mut params.merge_gap_ms, args.merge_gap_ms);
    set(&mut params.refractory_ms, args.refractory_ms);
    params.validate()?;
    let input = pick(args.input, &config.eeg.input, || out.join("trace.json"));
    let trace = eeg_io::read_trace(&input)?;
    let events = eeg::detect_blinks(&trace, params)?;
    write_json(&out.join("events.json"), &events)?;
    println!("detected {} blinks", events.len());
    Ok(EXIT_OK)
}

fn eeg_eval(args: EegEvalArgs, config: &mut RunConfig, out: &Path) -> Result<i32> {
    set(&mut config.eeg.tolerance_ms, args.tolerance_ms);
    set(&mut config.eeg.recall_floor, args.recall_floor);
    let events_path = pick(args.events, &config.eeg.events, || out.join("events.json"));
    let truth_path = pick(args.truth, &config.eeg.truth, || out.join("truth.json"));
    let events: Vec<eeg::BlinkEvent> = read_json(&events_path)?;
    let truth: Vec<f64> = read_json(&truth_path)?;
    let report = eeg::evaluate_detection(&events, &truth, config.eeg.tolerance_ms)?;
    write_json(&out.join("report.json"), &report)?;
    println!(
        "matched {}/{} blinks, recall {:.3}, precision {:.3}",
        report.matched, report.true_blinks, report.recall, report.precision
    );
    if report.recall < config.eeg.recall_floor {
        eprintln!("recall {} is below the floor {}", report.recall, config.eeg.recall_floor);
        return Ok(EXIT_FLOOR);
    }
    Ok(EXIT_OK)
}

fn emotion_train(args: EmotionTrainArgs, config: &mut RunConfig, out: &Path) -> Result<i32> {
    let cfg = &mut config.emotion;
    set(&mut cfg.train.steps, args.steps);
    set(&mut cfg.train.learning_rate, args.lr);
    set(&mut cfg.train.batch_size, args.batch_size);
    set(&mut cfg.hidden_dim, args.hidden);
    if args.accuracy_floor.is_some() {
        cfg.accuracy_floor = args.accuracy_floor;
    }
    if args.data.is_some() {
        cfg.dataset = args.data;
    }

    let set = match &cfg.dataset {
        Some(dir) => dataset::load_dataset(dir)?,
        None => toy::separable_toy_set(cfg.toy_sequences, config.seed)?,
    };
    let input_dim = set
        .first()
        .and_then(|(seq, _)| seq.dim())
        .ok_or_else(|| Error::Configuration("training set is empty".into()))?;
    let initial = ModelParams::init(Dims::new(input_dim, cfg.hidden_dim), config.seed);

    let eval_every = cfg.eval_every.max(1);
    let last = cfg.train.steps.saturating_sub(1);
    let mut curve = String::from("step,loss,train_accuracy\n");
    let mut final_accuracy = None;
    let mut eval_error = None;
    let trained = emotion::train_with(&initial, &set, &cfg.train, config.seed, |step, loss, params| {
        let accuracy = if step % eval_every == eval_every - 1 || step == last {
            match emotion::accuracy(params, &set) {
                Ok(a) => Some(a),
                Err(e) => {
                    eval_error.get_or_insert(e);
                    None
                }
            }
        } else {
            None
        };
        if step == last {
            final_accuracy = accuracy;
        }
        let accuracy = accuracy.map(|a| a.to_string()).unwrap_or_default();
        curve.push_str(&format!("{step},{loss},{accuracy}\n"));
    })?;
    if let Some(e) = eval_error {
        return Err(e);
    }
    let final_accuracy = match final_accuracy {
        Some(a) => a,
        None => emotion::accuracy(&trained, &set)?,
    };
    write_json(&out.join("params.json"), &trained)?;
    write_text(&out.join("loss.csv"), &curve)?;
    println!("trained {} steps on {} sequences, accuracy {final_accuracy:.4}", cfg.train.steps, set.len());
    if let Some(floor) = cfg.accuracy_floor {
        if final_accuracy < floor {
            eprintln!("training accuracy {final_accuracy} is below the floor {floor}");
            return Ok(EXIT_FLOOR);
        }
    }
    Ok(EXIT_OK)
}

fn load_params(path: &Path) -> Result<ModelParams> {
    let params: ModelParams = read_json(path)?;
    params
        .validate()
        .map_err(|e| Error::Configuration(format!("{}: {e}", path.display())))?;
    Ok(params)
}

fn emotion_classify(args: EmotionClassifyArgs, config: &mut RunConfig, out: &Path) -> Result<i32> {
    let params_path = pick(args.params, &config.emotion.params, || out.join("params.json"));
    let input = args
        .input
        .or_else(|| config.emotion.input.clone())
        .ok_or_else(|| Error::Configuration("classify needs --input".into()))?;
    let params = load_params(&params_path)?;
    let seq: emotion::FrameSequence = read_json(&input)?;
    let score = emotion::classify(&params, &seq)?;
    write_json(&out.join("score.json"), &score)?;
    println!(
        "{}: {} (p = {:.4})",
        seq.utterance_id,
        emotion::LabelNames::default().name(score.argmax),
        score.probabilities[score.argmax.index()]
    );
    Ok(EXIT_OK)
}

fn gradcheck(args: GradcheckArgs, config: &mut RunConfig, out: &Path) -> Result<i32> {
    let cfg = &mut config.emotion.gradcheck;
    set(&mut cfg.epsilon, args.epsilon);
    set(&mut cfg.tolerance, args.tolerance);
    let dims = Dims::new(cfg.input_dim, cfg.hidden_dim);
    let (params, batch) = emotion::gradcheck_instance(dims, cfg.frames, cfg.batch, config.seed)?;
    let report = emotion::gradient_check(&params, &batch, cfg.epsilon)?;
    write_json(&out.join("gradcheck.json"), &report)?;
    println!(
        "checked {} gradient entries, max relative error {:.3e} ({}[{}])",
        report.checked, report.max_relative_error, report.worst_tensor, report.worst_index
    );
    if report.max_relative_error.is_nan() || report.max_relative_error >= cfg.tolerance {
        eprintln!("gradient check failed: tolerance {}", cfg.tolerance);
        return Ok(EXIT_FLOOR);
    }
    Ok(EXIT_OK)
}

/// Twenty toy utterances from one device, 50 ms apart; every fifth asks
/// for high quality.
fn demo_workload(seed: u64) -> Result<Workload> {
    let requests = toy::separable_toy_set(20, seed)?
        .into_iter()
        .enumerate()
        .map(|(i, (sequence, _))| protocol::WorkItem {
            send_time_ms: 50.0 * i as f64,
            device: protocol::NodeId::device(0),
            quality: if i % 5 == 4 { Quality::High } else { Quality::Standard },
            sequence,
        })
        .collect();
    Ok(Workload { requests })
}

fn sim_run(args: SimRunArgs, config: &mut RunConfig, out: &Path) -> Result<i32> {
    let cfg = &mut config.sim;
    set(&mut cfg.latency_budget_ms, args.budget_ms);
    let topology = match args.topology.or_else(|| cfg.topology.clone()) {
        Some(path) => sim_io::read_topology(&path)?,
        None => Topology::chain(5.0, 10.0),
    };
    let workload = match args.workload.or_else(|| cfg.workload.clone()) {
        Some(path) => sim_io::read_workload(&path)?,
        None => demo_workload(config.seed)?,
    };
    let params = match args.params.or_else(|| cfg.params.clone()) {
        Some(path) => load_params(&path)?,
        None => {
            let input_dim = workload
                .requests
                .first()
                .and_then(|r| r.sequence.dim())
                .unwrap_or(toy::TOY_BANDS);
            ModelParams::init(Dims::new(input_dim, config.emotion.hidden_dim), config.seed)
        }
    };
    let recognize = |seq: &emotion::FrameSequence| emotion::classify(&params, seq);
    let classifiers = Classifiers { local: &recognize, cloud: &recognize };
    let sim_config = SimConfig { latency_budget_ms: cfg.latency_budget_ms, seed: config.seed };
    let outcome = protocol::run_simulation(&topology, &workload, classifiers, &sim_config)?;
    write_json(&out.join("sim_report.json"), &outcome.report)?;
    sim_io::write_event_log(&out.join("events.csv"), &outcome.log)?;
    let r = &outcome.report;
    println!(
        "sent {}, delivered {}, dropped {}, budget violations {}",
        r.sent, r.delivered, r.dropped, r.budget_violations
    );
    Ok(EXIT_OK)
}

fn curate_run(args: CurateRunArgs, config: &mut RunConfig, out: &Path) -> Result<i32> {
    let cfg = &mut config.curate;
    set(&mut cfg.thresholds.tau_sim, args.tau_sim);
    set(&mut cfg.thresholds.epsilon, args.epsilon);
    cfg.thresholds.validate()?;
    let mut dataset = match args.dataset.or_else(|| cfg.dataset.clone()) {
        Some(path) => curation::io::read_dataset(&path)?,
        None => CurationDataset::new(),
    };
    let candidates_path = args
        .candidates
        .or_else(|| cfg.candidates.clone())
        .ok_or_else(|| Error::Configuration("curate run needs --candidates".into()))?;
    let candidates = curation::io::read_samples(&candidates_path)?;
    let mut decisions = Vec::with_capacity(candidates.len());
    for candidate in &candidates {
        let (decision, next) = curation::admit(candidate, &dataset, &cfg.thresholds)?;
        dataset = next;
        decisions.push(decision);
    }
    write_text(&out.join("decisions.csv"), &curation::io::decisions_csv(&decisions))?;
    curation::io::write_dataset(&out.join("dataset.jsonl"), &dataset)?;
    let admitted = decisions.iter().filter(|d| d.admitted).count();
    println!(
        "admitted {admitted} of {} candidates, dataset now {} samples (purity {:.4})",
        decisions.len(),
        dataset.len(),
        curation::purity(&dataset)
    );
    Ok(EXIT_OK)
}
