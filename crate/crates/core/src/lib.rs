//! Fitbot: a desk-scale affective wearable stack.
//!
//! - [`eeg`]: synthetic single-channel EEG and threshold-based blink detection.
//! - [`emotion`]: acoustic band-energy features and an attention-pooled gated
//!   recurrent classifier over 21 emotion classes, with exact backprop.
//! - [`protocol`]: the binary emotion-message codec and a deterministic
//!   device/edge/cloud discrete-event simulator with offline fallback.
//! - [`curation`]: similarity and purity gated admission of soft-labeled samples.
//! - [`cli`]: the `fitbot` command-line pipelines.

pub mod cli;
pub mod curation;
pub mod eeg;
pub mod emotion;
mod error;
pub mod io;
pub mod protocol;

pub use error::{Error, Result};
