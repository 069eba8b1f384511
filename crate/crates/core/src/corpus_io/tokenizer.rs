use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::EOT_TOKEN;

/// Text <-> token id adapter. Only token counts and ids matter downstream,
/// so any vocabulary works as long as `encode` is deterministic.
pub trait Tokenizer: Send + Sync {
    fn name(&self) -> &str;
    fn encode(&self, text: &str) -> Vec<u32>;
    fn decode(&self, tokens: &[u32]) -> String;
}

/// One token per UTF-8 byte; ids 0..=255. Decoding is exact.
#[derive(Clone, Copy, Debug, Default)]
pub struct ByteTokenizer;

impl Tokenizer for ByteTokenizer {
    fn name(&self) -> &str {
        "bytes"
    }

    fn encode(&self, text: &str) -> Vec<u32> {
        text.bytes().map(u32::from).collect()
    }

    fn decode(&self, tokens: &[u32]) -> String {
        let bytes: Vec<u8> = tokens
            .iter()
            .filter(|&&t| t < 256)
            .map(|&t| t as u8)
            .collect();
        String::from_utf8_lossy(&bytes).into_owned()
    }
}

const WORD_ID_BASE: u32 = EOT_TOKEN + 1;
const WORD_ID_SPAN: u64 = (1u64 << 31) - WORD_ID_BASE as u64;

/// Splits on Unicode whitespace. Word ids are a stable hash of the word, so
/// encoding is order-independent; a reverse table filled during `encode`
/// backs `decode`. Decoding joins words with single spaces.
#[derive(Debug, Default)]
pub struct WhitespaceTokenizer {
    words: Mutex<HashMap<u32, String>>,
}

impl WhitespaceTokenizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn word_id(word: &str) -> u32 {
        // FNV-1a
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in word.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        WORD_ID_BASE + (h % WORD_ID_SPAN) as u32
    }
}

impl Tokenizer for WhitespaceTokenizer {
    fn name(&self) -> &str {
        "whitespace"
    }

    fn encode(&self, text: &str) -> Vec<u32> {
        let mut words = self.words.lock().expect("tokenizer table poisoned");
        text.split_whitespace()
            .map(|w| {
                let id = Self::word_id(w);
                words.entry(id).or_insert_with(|| w.to_owned());
                id
            })
            .collect()
    }

    fn decode(&self, tokens: &[u32]) -> String {
        let words = self.words.lock().expect("tokenizer table poisoned");
        let parts: Vec<String> = tokens
            .iter()
            .map(|t| match words.get(t) {
                Some(w) => w.clone(),
                None if *t == EOT_TOKEN => "<eot>".to_owned(),
                None => format!("<unk:{t}>"),
            })
            .collect();
        parts.join(" ")
    }
}

/// Resolve a tokenizer by CLI name. `pretokenized` yields `None`: records
/// must then carry their own token ids.
pub fn tokenizer_by_name(name: &str) -> Result<Option<Box<dyn Tokenizer>>> {
    match name {
        "bytes" | "byte" => Ok(Some(Box::new(ByteTokenizer))),
        "whitespace" => Ok(Some(Box::new(WhitespaceTokenizer::new()))),
        "pretokenized" => Ok(None),
        other => Err(Error::invalid(
            "tokenizer",
            format!("unknown tokenizer {other:?} (expected bytes, whitespace or pretokenized)"),
        )),
    }
}
