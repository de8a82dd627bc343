//! Labelled utterance sets on disk: a directory holding one
//! `<utterance_id>.json` [`FrameSequence`] per utterance and a `labels.csv`
//! with an `utterance_id,label_index` header.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EmotionLabel, FrameSequence};
use crate::io::{read_json, write_json, write_text};
use crate::{Error, Result};

pub const LABELS_FILE: &str = "labels.csv";

#[derive(Serialize, Deserialize)]
struct LabelRow {
    utterance_id: String,
    label_index: usize,
}

/// Loads every utterance listed in `labels.csv`, in file order.
pub fn load_dataset(dir: &Path) -> Result<Vec<(FrameSequence, EmotionLabel)>> {
    let labels_path = dir.join(LABELS_FILE);
    let mut reader = csv::Reader::from_path(&labels_path).map_err(|e| Error::csv(&labels_path, e))?;
    let mut out = Vec::new();
    for row in reader.deserialize::<LabelRow>() {
        let row = row.map_err(|e| Error::csv(&labels_path, e))?;
        let label = EmotionLabel::new(row.label_index)?;
        let seq_path = dir.join(format!("{}.json", row.utterance_id));
        let seq: FrameSequence = read_json(&seq_path)?;
        seq.validate()?;
        if seq.utterance_id != row.utterance_id {
            return Err(Error::invalid(format!(
                "{} holds utterance {:?}",
                seq_path.display(),
                seq.utterance_id
            )));
        }
        out.push((seq, label));
    }
    Ok(out)
}

pub fn save_dataset(dir: &Path, set: &[(FrameSequence, EmotionLabel)]) -> Result<()> {
    let mut labels = String::from("utterance_id,label_index\n");
    for (seq, label) in set {
        if seq.utterance_id.is_empty() || seq.utterance_id.contains(['/', '\\', ',', '\n']) {
            return Err(Error::invalid(format!(
                "utterance id {:?} cannot be used as a file name",
                seq.utterance_id
            )));
        }
        write_json(&dir.join(format!("{}.json", seq.utterance_id)), seq)?;
        labels.push_str(&format!("{},{}\n", seq.utterance_id, label.index()));
    }
    write_text(&dir.join(LABELS_FILE), &labels)
}
