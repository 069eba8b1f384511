use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus_io::Tokenizer;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// The fields of a case record that scoring needs; prompt tokens are
/// skipped when reading case files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseMeta {
    pub case_id: String,
    pub context_len: u64,
    pub depth: f64,
    pub expected_answer: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub case_id: String,
    pub output_text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredCase {
    pub case_id: String,
    pub context_len: u64,
    pub depth: f64,
    pub score: f64,
}

/// Lowercase, trim punctuation from word edges and collapse whitespace.
pub fn normalize_text(s: &str) -> String {
    s.split_whitespace()
        .map(|w| w.trim_matches(|c: char| c.is_ascii_punctuation()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// 1.0 when the normalized output contains the normalized answer, else the
/// multiset recall of answer tokens among output tokens.
pub fn score_response(expected_answer: &str, model_output: &str, tokenizer: &dyn Tokenizer) -> f64 {
    let answer = normalize_text(expected_answer);
    let output = normalize_text(model_output);
    if output.is_empty() {
        return 0.0;
    }
    if answer.is_empty() || output.contains(&answer) {
        return 1.0;
    }
    let want = tokenizer.encode(&answer);
    let mut have: HashMap<u32, usize> = HashMap::new();
    for t in tokenizer.encode(&output) {
        *have.entry(t).or_default() += 1;
    }
    let hit = want
        .iter()
        .filter(|t| match have.get_mut(t) {
            Some(n) if *n > 0 => {
                *n -= 1;
                true
            }
            _ => false,
        })
        .count();
    hit as f64 / want.len() as f64
}

/// Score one transcript per case. Unknown, duplicate and missing case ids
/// are all errors.
pub fn score_transcripts(
    cases: &[CaseMeta],
    transcripts: &[Transcript],
    tokenizer: &dyn Tokenizer,
    exec: Execution,
) -> Result<Vec<ScoredCase>> {
    let mut by_id: BTreeMap<&str, &str> = BTreeMap::new();
    for t in transcripts {
        if by_id.insert(&t.case_id, &t.output_text).is_some() {
            return Err(Error::invalid("transcripts", format!("duplicate case_id {}", t.case_id)));
        }
    }
    let known: std::collections::HashSet<&str> = cases.iter().map(|c| c.case_id.as_str()).collect();
    if let Some(id) = by_id.keys().find(|id| !known.contains(*id)) {
        return Err(Error::invalid("transcripts", format!("unknown case_id {id}")));
    }
    let missing: Vec<&str> = cases
        .iter()
        .map(|c| c.case_id.as_str())
        .filter(|id| !by_id.contains_key(id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::invalid(
            "transcripts",
            format!("{} cases without a transcript: {}", missing.len(), preview(&missing)),
        ));
    }
    Ok(exec::map(exec, cases, |c| ScoredCase {
        case_id: c.case_id.clone(),
        context_len: c.context_len,
        depth: c.depth,
        score: score_response(&c.expected_answer, by_id[c.case_id.as_str()], tokenizer),
    }))
}

pub(crate) fn preview(ids: &[&str]) -> String {
    let mut s = ids.iter().take(10).copied().collect::<Vec<_>>().join(", ");
    if ids.len() > 10 {
        s.push_str(", ...");
    }
    s
}
