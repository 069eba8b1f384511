use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_NEEDLE: &str =
    "The best thing to do in San Francisco is eat a sandwich and sit in Dolores Park on a sunny day.";
pub const DEFAULT_QUESTION: &str = "What is the best thing to do in San Francisco?";
pub const DEFAULT_ANSWER: &str = "eat a sandwich and sit in Dolores Park on a sunny day";

/// 16 log-spaced lengths from 1024 to 131072 tokens.
pub fn default_lengths() -> Vec<u64> {
    (0..16)
        .map(|i| (1024.0 * 128f64.powf(i as f64 / 15.0)).round() as u64)
        .collect()
}

/// 0, 1/9, ..., 1.
pub fn default_depths() -> Vec<f64> {
    (0..10).map(|i| i as f64 / 9.0).collect()
}

pub fn case_id(context_len: u64, depth: f64) -> String {
    format!("L{context_len}-D{depth:.4}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeedleSpec {
    pub needle_text: String,
    pub question_text: String,
    pub expected_answer: String,
    pub lengths: Vec<u64>,
    pub depths: Vec<f64>,
}

impl Default for NeedleSpec {
    fn default() -> Self {
        NeedleSpec {
            needle_text: DEFAULT_NEEDLE.to_owned(),
            question_text: DEFAULT_QUESTION.to_owned(),
            expected_answer: DEFAULT_ANSWER.to_owned(),
            lengths: default_lengths(),
            depths: default_depths(),
        }
    }
}

impl NeedleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.needle_text.trim().is_empty() {
            return Err(Error::invalid("needle_text", "empty"));
        }
        if self.expected_answer.trim().is_empty() {
            return Err(Error::invalid("expected_answer", "empty"));
        }
        if self.lengths.is_empty() || self.depths.is_empty() {
            return Err(Error::invalid("grid", "lengths and depths must be non-empty"));
        }
        if self.lengths[0] == 0 || self.lengths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("lengths", "must be positive and strictly ascending"));
        }
        if self.depths.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return Err(Error::invalid("depths", "must lie in [0, 1]"));
        }
        if self.depths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("depths", "must be strictly ascending"));
        }
        let ids: std::collections::BTreeSet<String> = self.depths.iter().map(|&d| case_id(0, d)).collect();
        if ids.len() != self.depths.len() {
            return Err(Error::invalid("depths", "depths must differ at 4 decimal places"));
        }
        Ok(())
    }
}
