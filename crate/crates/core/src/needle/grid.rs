use serde::{Deserialize, Serialize};

use super::spec::{case_id, NeedleSpec};
use crate::corpus_io::{Document, Tokenizer};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeedleCase {
    pub case_id: String,
    pub context_len: u64,
    #[serde(rename = "depth")]
    pub depth_fraction: f64,
    pub insertion_index: u64,
    /// Token span of the needle inside `prompt_tokens`.
    pub needle_len: u64,
    pub prompt_tokens: Vec<u32>,
    pub expected_answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_text: Option<String>,
}

fn filler_streams(filler: &[Document], tokenizer: Option<&dyn Tokenizer>) -> Result<Vec<Vec<u32>>> {
    let streams: Vec<Vec<u32>> = filler
        .iter()
        .filter_map(|d| d.resolve_tokens(tokenizer))
        .filter(|t| !t.is_empty())
        .collect();
    if streams.is_empty() {
        return Err(Error::invalid("filler", "filler corpus has no tokens"));
    }
    Ok(streams)
}

fn cycle_take(streams: &[Vec<u32>], n: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(n);
    for doc in streams.iter().cycle() {
        let take = (n - out.len()).min(doc.len());
        out.extend_from_slice(&doc[..take]);
        if out.len() == n {
            break;
        }
    }
    out
}

/// Concatenate filler documents in order, cycling when exhausted, and cut
/// to `target_len - reserve` tokens. Deterministic: no sampling involved.
pub fn build_haystack(
    filler: &[Document],
    target_len: u64,
    reserve: u64,
    tokenizer: Option<&dyn Tokenizer>,
) -> Result<Vec<u32>> {
    if target_len <= reserve {
        return Err(Error::invalid(
            "target_len",
            format!("{target_len} leaves no room for {reserve} reserved tokens"),
        ));
    }
    let streams = filler_streams(filler, tokenizer)?;
    Ok(cycle_take(&streams, (target_len - reserve) as usize))
}

/// Insert `needle` before haystack position `round(depth * len)`. Nothing
/// is overwritten.
pub fn insert_needle(haystack: &[u32], needle: &[u32], depth_fraction: f64) -> (Vec<u32>, usize) {
    let at = ((depth_fraction.clamp(0.0, 1.0) * haystack.len() as f64).round() as usize).min(haystack.len());
    let mut out = Vec::with_capacity(haystack.len() + needle.len());
    out.extend_from_slice(&haystack[..at]);
    out.extend_from_slice(needle);
    out.extend_from_slice(&haystack[at..]);
    (out, at)
}

/// Needle and question token sequences. Padding spaces keep byte-level
/// needles from fusing with neighbouring filler words.
fn encode_parts(spec: &NeedleSpec, tok: &dyn Tokenizer) -> (Vec<u32>, Vec<u32>) {
    let needle = tok.encode(&format!(" {} ", spec.needle_text.trim()));
    let question = tok.encode(&format!("\n{}\n", spec.question_text.trim()));
    (needle, question)
}

/// One case per (length, depth), lengths outer. Every prompt is exactly
/// `context_len` tokens: haystack, needle inside it, question at the end.
pub fn generate_grid(
    spec: &NeedleSpec,
    filler: &[Document],
    tokenizer: &dyn Tokenizer,
    exec: Execution,
) -> Result<Vec<NeedleCase>> {
    spec.validate()?;
    let (needle, question) = encode_parts(spec, tokenizer);
    let reserve = (needle.len() + question.len()) as u64;
    let too_small: Vec<String> = spec
        .lengths
        .iter()
        .filter(|&&l| l <= reserve)
        .flat_map(|&l| spec.depths.iter().map(move |&d| case_id(l, d)))
        .collect();
    if !too_small.is_empty() {
        return Err(Error::invalid(
            "lengths",
            format!(
                "cells {} are too short for needle + question ({reserve} tokens)",
                too_small.join(", ")
            ),
        ));
    }
    let streams = filler_streams(filler, Some(tokenizer))?;
    let longest = *spec.lengths.last().expect("validated non-empty");
    let hay = cycle_take(&streams, (longest - reserve) as usize);

    let cells: Vec<(u64, f64)> = spec
        .lengths
        .iter()
        .flat_map(|&l| spec.depths.iter().map(move |&d| (l, d)))
        .collect();
    Ok(exec::map(exec, &cells, |&(len, depth)| {
        let (mut prompt, at) = insert_needle(&hay[..(len - reserve) as usize], &needle, depth);
        prompt.extend_from_slice(&question);
        debug_assert_eq!(prompt.len() as u64, len);
        NeedleCase {
            case_id: case_id(len, depth),
            context_len: len,
            depth_fraction: depth,
            insertion_index: at as u64,
            needle_len: needle.len() as u64,
            prompt_tokens: prompt,
            expected_answer: spec.expected_answer.clone(),
            prompt_text: None,
        }
    }))
}
