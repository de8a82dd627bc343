//! Topology and workload JSON files and the CSV event log.

use std::path::Path;

use super::{EventRecord, Topology, Workload};
use crate::{Error, Result};

pub fn read_topology(path: &Path) -> Result<Topology> {
    let topology: Topology = crate::io::read_json(path).map_err(|e| match e {
        Error::Json { path, source } => {
            Error::Configuration(format!("malformed topology {}: {source}", path.display()))
        }
        other => other,
    })?;
    topology.validate()?;
    Ok(topology)
}

pub fn read_workload(path: &Path) -> Result<Workload> {
    crate::io::read_json(path).map_err(|e| match e {
        Error::Json { path, source } => {
            Error::Configuration(format!("malformed workload {}: {source}", path.display()))
        }
        other => other,
    })
}

pub fn event_log_csv(log: &[EventRecord]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for record in log {
        writer.serialize(record).map_err(|e| Error::csv("<event log>", e))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::InvalidState(format!("event log buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn write_event_log(path: &Path, log: &[EventRecord]) -> Result<()> {
    crate::io::write_text(path, &event_log_csv(log)?)
}
