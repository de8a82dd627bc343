//! Trace files.
//!
//! CSV traces carry a `time_ms,amplitude` header and one sample per row;
//! the sample rate is recovered from the time column and the electrode
//! names fall back to the defaults. JSON traces keep all metadata.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ElectrodeConfig, EegTrace};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Row {
    time_ms: f64,
    amplitude: f64,
}

pub fn trace_to_csv(trace: &EegTrace) -> String {
    let mut out = String::from("time_ms,amplitude\n");
    for (i, s) in trace.samples.iter().enumerate() {
        out.push_str(&format!("{},{}\n", trace.time_at(i), s));
    }
    out
}

pub fn trace_from_csv(text: &str) -> Result<EegTrace> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows = reader
        .deserialize::<Row>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::invalid(format!("malformed trace csv: {e}")))?;
    if rows.len() < 2 {
        return Err(Error::invalid("trace csv needs at least 2 rows to infer the sample rate"));
    }
    let first = rows[0].time_ms;
    let last = rows[rows.len() - 1].time_ms;
    let step = (last - first) / (rows.len() - 1) as f64;
    if !(first >= 0.0 && step > 0.0) {
        return Err(Error::invalid("trace csv time column must start non-negative and increase"));
    }
    let trace = EegTrace {
        sample_rate_hz: 1000.0 / step,
        start_time_ms: first.round() as u64,
        electrodes: ElectrodeConfig::default(),
        samples: rows.into_iter().map(|r| r.amplitude).collect(),
    };
    trace.validate()?;
    Ok(trace)
}

pub fn read_trace_csv(path: &Path) -> Result<EegTrace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    trace_from_csv(&text)
}

pub fn write_trace_csv(path: &Path, trace: &EegTrace) -> Result<()> {
    crate::io::write_text(path, &trace_to_csv(trace))
}

pub fn read_trace_json(path: &Path) -> Result<EegTrace> {
    let trace: EegTrace = crate::io::read_json(path)?;
    trace.validate()?;
    Ok(trace)
}

/// Reads a trace, choosing the format by file extension (`.csv` or JSON).
pub fn read_trace(path: &Path) -> Result<EegTrace> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => read_trace_csv(path),
        _ => read_trace_json(path),
    }
}
