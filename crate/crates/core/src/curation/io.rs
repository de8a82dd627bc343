//! JSON-lines datasets and the CSV decision log.

use std::path::Path;

use super::{AdmissionDecision, CurationDataset, CurationSample};
use crate::{Error, Result};

pub fn samples_from_jsonl(text: &str) -> Result<Vec<CurationSample>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(n, line)| {
            serde_json::from_str(line)
                .map_err(|e| Error::invalid(format!("line {}: {e}", n + 1)))
        })
        .collect()
}

pub fn samples_to_jsonl(samples: &[CurationSample]) -> String {
    samples
        .iter()
        .map(|s| serde_json::to_string(s).expect("samples serialize") + "\n")
        .collect()
}

pub fn read_samples(path: &Path) -> Result<Vec<CurationSample>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    samples_from_jsonl(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

pub fn read_dataset(path: &Path) -> Result<CurationDataset> {
    CurationDataset::from_samples(read_samples(path)?)
}

pub fn write_dataset(path: &Path, dataset: &CurationDataset) -> Result<()> {
    crate::io::write_text(path, &samples_to_jsonl(dataset.samples()))
}

/// `id,admitted,reason,similarity,purity_before,purity_after`
pub fn decisions_csv(decisions: &[AdmissionDecision]) -> String {
    let mut out = String::from("id,admitted,reason,similarity,purity_before,purity_after\n");
    for d in decisions {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            d.id,
            d.admitted,
            d.reason.as_str(),
            d.similarity,
            d.purity_before,
            d.purity_after
        ));
    }
    out
}
