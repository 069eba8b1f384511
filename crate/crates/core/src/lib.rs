//! Data recipes for long-context continual pretraining.
//!
//! The crate covers the full offline pipeline: ingest domain-tagged corpora
//! into sharded JSONL, measure per-domain length statistics, build seeded
//! mixtures (cut-at-N, per-source / global / domain upsampling), pack the
//! draws into fixed-length training chunks, plan step counts and wallclock,
//! and generate/score needle-in-a-haystack retrieval grids.
//!
//! Data-parallel loops go through [`exec::Execution`]; with the `parallel`
//! feature disabled every path runs sequentially and produces identical
//! output.

pub mod corpus_io;
pub mod error;
pub mod exec;
pub mod jsonl;
pub mod mixture;
pub mod needle;
pub mod packer;
pub mod report;
pub mod stats;
mod svg;

pub use error::{Error, Result};
pub use exec::Execution;

/// Reserved end-of-text id shared by the built-in tokenizers.
pub const EOT_TOKEN: u32 = 256;

/// Default long-document threshold in tokens ("longer than 4K" is strict).
pub const DEFAULT_LONG_THRESHOLD: u64 = 4096;
